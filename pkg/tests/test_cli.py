"""Command-line interface: reports, determinism, exit codes, schema."""

import json
import subprocess
import sys
from fractions import Fraction
from importlib.resources import files

import jsonschema
import pytest
from click.testing import CliRunner

from ncforms.algebra import inner_derivation
from ncforms.cli import _VERIFY_CHECKS, main
from ncforms.dsl import builtin_algebra
from ncforms.fieldforms import (field_from_derivation,
                                field_valued_form_from_json,
                                field_valued_form_space, fn_bracket)
from ncforms.linalg import QMat
from ncforms.schouten import (MultiMap, alternation, commutator_bivector,
                              multimap_from_json, nr_bracket)

BUILTINS = ["k", "dual", "truncpoly3", "kxk", "m2", "kc2", "upper2"]

SWAP_ACTION = """
action swap {
    elements e, s;
    e*e = e; e*s = s; s*e = s; s*s = e;
    map e: 1 -> 1, a.1 -> a.1;
    map s: 1 -> 1, a.1 -> 1 - a.1;
}
"""

BROKEN_TABLE = """
algebra broken {
    basis 1, x, y;
    x*x = y;
    x*y = 1;
    y*x = x;
    y*y = y;
}
"""


def run_cli(*args, env=None):
    return CliRunner(env=env).invoke(main, list(args))


def run_json(*args, env=None):
    result = run_cli(*args, "--format", "json", env=env)
    report = json.loads(result.stdout) if result.stdout else None
    return result, report


def load_schema():
    text = (files("ncforms") / "schemas" / "report.schema.json").read_text()
    return json.loads(text)


def frac(v):
    return Fraction(v)


@pytest.fixture(scope="module")
def m2():
    return builtin_algebra("m2")


@pytest.fixture(scope="module")
def m2_fields(m2, tmp_path_factory):
    """Two serialized degree-0 fields and one degree-1 field over m2."""
    base = tmp_path_factory.mktemp("fields")
    mod = m2.regular_bimodule()
    X = field_from_derivation(
        m2, inner_derivation(mod, [frac(0), frac(1), frac(0), frac(0)]))
    Y = field_from_derivation(
        m2, inner_derivation(mod, [frac(0), frac(0), frac(1), frac(0)]))
    L = field_valued_form_space(m2, 1)[0]
    paths = {}
    for name, obj in (("X", X), ("Y", Y), ("L", L)):
        p = base / f"{name}.json"
        p.write_text(json.dumps(obj.to_json()))
        paths[name] = str(p)
    return {"X": X, "Y": Y, "L": L, "paths": paths}


# ---------------------------------------------------------------------------
# info
# ---------------------------------------------------------------------------


def test_info_reports_form_dims_for_dual():
    result, report = run_json("info", "--builtin", "dual", "-N", "3")
    assert result.exit_code == 0
    assert report["data"]["omega_dims"] == [2, 2, 2, 2]
    assert report["algebra"] == {"name": "dual", "dim": 2,
                                 "source": "builtin dual"}


def test_info_includes_center_and_derivation_dims():
    result, report = run_json("info", "--builtin", "m2")
    assert result.exit_code == 0
    assert report["data"]["derivation_dim"] == 3
    assert report["data"]["center_dim"] == 1
    assert report["data"]["basis"] == ["1", "E11", "E12", "E21"]


def test_info_text_layout():
    result = run_cli("info", "--builtin", "dual", "-N", "2", "--seed", "9")
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0].startswith("ncforms ")
    assert lines[0].endswith(" info")
    assert lines[1] == "algebra: dual (dim 2) [builtin dual]"
    assert lines[2] == "seed=9 truncation=2 size-cap=100000"
    assert "checks: 0 passed: 0 failed: 0" in lines


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_square_matrix_algebra_passes():
    result, report = run_json("verify", "--builtin", "matrix(2)",
                              "-N", "2", "--seed", "42")
    assert result.exit_code == 0
    assert report["counts"]["failed"] == 0
    assert report["counts"]["checks"] == len(_VERIFY_CHECKS)


@pytest.mark.parametrize("name", BUILTINS)
def test_verify_passes_on_every_builtin(name):
    result, report = run_json("verify", "--builtin", name, "-N", "2",
                              "--seed", "5")
    assert result.exit_code == 0, result.stdout
    assert report["counts"]["failed"] == 0


def test_verify_check_names_sorted_and_frozen():
    result, report = run_json("verify", "--builtin", "dual", "-N", "1")
    assert result.exit_code == 0
    names = [c["name"] for c in report["checks"]]
    assert names == sorted(names)
    assert set(names) == {name for name, _ in _VERIFY_CHECKS}
    assert len(names) == 29


def test_verify_reports_byte_identical_across_runs():
    args = ("verify", "--builtin", "m2", "-N", "2", "--seed", "11")
    first = run_cli(*args, "--format", "json")
    second = run_cli(*args, "--format", "json")
    assert first.exit_code == second.exit_code == 0
    assert first.stdout == second.stdout
    text_a = run_cli(*args)
    text_b = run_cli(*args)
    assert text_a.stdout == text_b.stdout


def test_verify_records_the_seed():
    _, r1 = run_json("verify", "--builtin", "dual", "-N", "1", "--seed", "3")
    _, r2 = run_json("verify", "--builtin", "dual", "-N", "1", "--seed", "4")
    assert r1["seed"] == 3 and r2["seed"] == 4
    assert r1["counts"]["failed"] == r2["counts"]["failed"] == 0


def test_verify_accepts_action_file(tmp_path):
    act = tmp_path / "swap.act"
    act.write_text(SWAP_ACTION)
    result, report = run_json("verify", "--builtin", "kxk", "-N", "2",
                              "--action", str(act))
    assert result.exit_code == 0
    assert report["counts"]["failed"] == 0


def test_verify_passes_and_fail_lines_render_in_text():
    result = run_cli("verify", "--builtin", "dual", "-N", "1")
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    passes = [ln for ln in lines if ln.startswith("PASS ")]
    assert len(passes) == 29
    assert not any(ln.startswith("FAIL ") for ln in lines)


# ---------------------------------------------------------------------------
# determinism through the real entry point
# ---------------------------------------------------------------------------


def run_subprocess(*args):
    return subprocess.run([sys.executable, "-m", "ncforms.cli", *args],
                          capture_output=True, timeout=120)


def test_subprocess_reports_byte_identical():
    args = ("verify", "--builtin", "dual", "-N", "2", "--seed", "42",
            "--format", "json")
    first = run_subprocess(*args)
    second = run_subprocess(*args)
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout
    assert first.stdout


# ---------------------------------------------------------------------------
# exit-code contract
# ---------------------------------------------------------------------------


def test_requires_exactly_one_algebra_source(tmp_path):
    result = run_cli("verify")
    assert result.exit_code == 2
    assert "exactly one" in result.stderr
    some = tmp_path / "a.alg"
    some.write_text("builtin dual;")
    both = run_cli("verify", "--builtin", "dual", "--algebra", str(some))
    assert both.exit_code == 2


def test_truncation_must_be_at_least_one():
    result = run_cli("info", "--builtin", "dual", "-N", "0")
    assert result.exit_code == 2
    assert "truncation" in result.stderr


def test_corrupted_table_exits_2_with_witness(tmp_path):
    bad = tmp_path / "broken.alg"
    bad.write_text(BROKEN_TABLE)
    result = run_cli("verify", "--algebra", str(bad))
    assert result.exit_code == 2
    assert "not associative at (x, x)" in result.stderr
    assert result.stdout == ""


def test_unknown_builtin_exits_2():
    result = run_cli("info", "--builtin", "nosuch(3)")
    assert result.exit_code == 2
    assert "nosuch" in result.stderr


def test_missing_input_file_exits_2(m2_fields):
    result = run_cli("fn-bracket", "/nonexistent/left.json",
                     m2_fields["paths"]["Y"], "--builtin", "m2")
    assert result.exit_code == 2


def test_malformed_json_input_exits_2(tmp_path, m2_fields):
    garbage = tmp_path / "garbage.json"
    garbage.write_text("not json at all")
    result = run_cli("nr-bracket", str(garbage), m2_fields["paths"]["X"],
                     "--builtin", "m2")
    assert result.exit_code == 2
    assert "invalid JSON" in result.stderr


def test_non_derivation_field_input_exits_2(tmp_path):
    bad = tmp_path / "notfield.json"
    bad.write_text(json.dumps(
        {"degree": 0, "delta": [["1", "0"], ["0", "0"]]}))
    result = run_cli("fn-bracket", str(bad), str(bad), "--builtin", "dual")
    assert result.exit_code == 2
    assert "derivation" in result.stderr


def test_alg_bracket_rejects_degree_zero_inputs(m2_fields):
    result = run_cli("alg-bracket", m2_fields["paths"]["X"],
                     m2_fields["paths"]["Y"], "--builtin", "m2")
    assert result.exit_code == 2
    assert "subscripts >= 1" in result.stderr


def test_env_size_cap_rejects_garbage():
    result = run_cli("derham", "--builtin", "dual",
                     env={"NCFORMS_SIZE_CAP": "abc"})
    assert result.exit_code == 2


def test_env_size_cap_limits_computations():
    result = run_cli("derham", "--builtin", "m2", "-N", "3",
                     env={"NCFORMS_SIZE_CAP": "10"})
    assert result.exit_code == 2
    assert "cap" in result.stderr


def test_size_cap_option_overrides_env():
    result, report = run_json("derham", "--builtin", "m2", "-N", "2",
                              "--size-cap", "100000",
                              env={"NCFORMS_SIZE_CAP": "10"})
    assert result.exit_code == 0
    assert report["size_cap"] == 100000


# ---------------------------------------------------------------------------
# bracket subcommands round-trip serialized objects
# ---------------------------------------------------------------------------


def test_fn_bracket_matches_library(m2, m2_fields):
    result, report = run_json("fn-bracket", m2_fields["paths"]["X"],
                              m2_fields["paths"]["Y"], "--builtin", "m2")
    assert result.exit_code == 0
    expected = fn_bracket(m2_fields["X"], m2_fields["Y"])
    got = field_valued_form_from_json(m2, report["data"]["bracket"])
    assert got == expected


def test_alg_bracket_on_one_forms(m2, m2_fields):
    result, report = run_json("alg-bracket", m2_fields["paths"]["L"],
                              m2_fields["paths"]["L"], "--builtin", "m2")
    assert result.exit_code == 0
    got = field_valued_form_from_json(m2, report["data"]["bracket"])
    assert got.degree == 1


def test_nr_bracket_matches_library(m2, tmp_path):
    mod = m2.regular_bimodule()
    K = MultiMap(m2, 1, inner_derivation(
        mod, [frac(0), frac(1), frac(0), frac(0)]))
    mu = commutator_bivector(m2)
    kp, mp = tmp_path / "K.json", tmp_path / "mu.json"
    kp.write_text(json.dumps(K.to_json()))
    mp.write_text(json.dumps(mu.to_json()))
    result, report = run_json("nr-bracket", str(kp), str(mp),
                              "--builtin", "m2")
    assert result.exit_code == 0
    got = multimap_from_json(m2, report["data"]["bracket"])
    assert got == nr_bracket(K, mu)


# ---------------------------------------------------------------------------
# computation subcommands
# ---------------------------------------------------------------------------


def test_curvature_subcommand_all_projections_pass():
    result, report = run_json("curvature", "--builtin", "upper2", "-N", "2")
    assert result.exit_code == 0
    assert report["data"]["count"] >= 2
    assert report["counts"]["failed"] == 0
    first = report["data"]["projections"][0]
    assert {"index", "endomorphism", "curvature", "cocurvature"} <= set(first)


def test_bianchi_subcommand_passes_on_square_matrices():
    result, report = run_json("bianchi", "--builtin", "m2", "-N", "2")
    assert result.exit_code == 0
    assert report["counts"]["failed"] == 0
    assert report["data"]["count"] >= 1


def test_connection_check_with_swap_action(tmp_path):
    act = tmp_path / "swap.act"
    act.write_text(SWAP_ACTION)
    result, report = run_json("connection-check", "--builtin", "kxk",
                              "--action", str(act))
    assert result.exit_code == 0
    assert report["data"]["base_dim"] == 1
    assert report["data"]["count"] >= 1
    assert all(e["principal"] for e in report["data"]["connections"])
    assert report["counts"]["failed"] == 0


def test_hochschild_subcommand_dimensions():
    result, report = run_json("hochschild", "--builtin", "dual", "-N", "3")
    assert result.exit_code == 0
    by_n = {r["n"]: r for r in report["data"]["reports"]}
    assert by_n[0]["dim_Hn_complex"] == 2
    assert by_n[1]["dim_Hn_complex"] == 1
    assert all(r["agree"] for r in report["data"]["reports"])


def test_derham_subcommand_reports_homology():
    result, report = run_json("derham", "--builtin", "truncpoly3", "-N", "3")
    assert result.exit_code == 0
    assert report["data"]["homology_dims"][0] == 1
    assert report["data"]["top_degree_incomplete"] is True


def test_poisson_check_commutator_passes_everywhere():
    for name in BUILTINS:
        result, report = run_json("poisson-check", "--builtin", name)
        assert result.exit_code == 0, name
        verdicts = {c["name"]: c["passed"] for c in report["checks"]}
        assert verdicts == {"skew": True, "biderivation": True,
                            "jacobi": True, "poisson": True}


def test_poisson_check_failure_exits_1(m2, tmp_path):
    raw = MultiMap(m2, 2, QMat.from_rows(
        [[frac((i * 7 + j * 3) % 5 - 2) for j in range(16)]
         for i in range(4)]), check=False)
    bad = alternation(raw)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad.to_json()))
    result, report = run_json("poisson-check", str(path), "--builtin", "m2")
    assert result.exit_code == 1
    verdicts = {c["name"]: c for c in report["checks"]}
    assert not verdicts["poisson"]["passed"]
    assert verdicts["poisson"]["witness"]


def test_kernel_mu_n_subcommand():
    result, report = run_json("kernel-mu-n", "--builtin", "kxk", "-N", "3")
    assert result.exit_code == 0
    assert [r["arity"] for r in report["data"]["reports"]] == [2, 3]
    assert all(r["equal"] for r in report["data"]["reports"])


# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------


def test_json_reports_validate_against_shipped_schema(tmp_path, m2_fields):
    schema = load_schema()
    act = tmp_path / "swap.act"
    act.write_text(SWAP_ACTION)
    invocations = [
        ("info", "--builtin", "dual"),
        ("verify", "--builtin", "dual", "-N", "1"),
        ("fn-bracket", m2_fields["paths"]["X"], m2_fields["paths"]["Y"],
         "--builtin", "m2"),
        ("curvature", "--builtin", "dual", "-N", "2"),
        ("bianchi", "--builtin", "dual", "-N", "2"),
        ("connection-check", "--builtin", "kxk", "--action", str(act)),
        ("hochschild", "--builtin", "dual", "-N", "2"),
        ("derham", "--builtin", "dual", "-N", "2"),
        ("poisson-check", "--builtin", "upper2"),
        ("kernel-mu-n", "--builtin", "dual", "-N", "2"),
    ]
    for args in invocations:
        result, report = run_json(*args)
        assert result.exit_code == 0, (args, result.stderr)
        jsonschema.validate(report, schema)


def test_failing_report_still_validates(m2, tmp_path):
    schema = load_schema()
    raw = MultiMap(m2, 2, QMat.from_rows(
        [[frac((i * 5 + j) % 5 - 2) for j in range(16)]
         for i in range(4)]), check=False)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(alternation(raw).to_json()))
    result, report = run_json("poisson-check", str(path), "--builtin", "m2")
    assert result.exit_code == 1
    jsonschema.validate(report, schema)
