"""Deterministic command-line reports over exact algebra computations.

Every subcommand loads one algebra (from a definition file or a builtin
expression), runs exact rational computations, and prints a report to
stdout either as fixed-layout text or as canonically serialized JSON
(sorted keys, two-space indent).  Reports are byte-for-byte reproducible
given the same input, seed, and package version.

Exit codes: 0 when every check passes, 1 when a mathematical check fails
(the report carries a witness), 2 for input or parse errors (diagnostics
go to stderr).
"""

from __future__ import annotations

import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import click

from . import __version__
from .algebra import (Algebra, AlgebraError, AlgebraHom, derivation_matrix,
                      derivation_vector, derivation_space, inner_derivation,
                      is_derivation)
from .connections import (Bundle, GeometryError, GroupAction,
                          bianchi_identities, bundle_tensor_dims,
                          check_projection_calculus, curvature,
                          curvature_horizontality, find_connections,
                          find_projections, is_connection, is_principal)
from .dsl import (DslError, builtin_algebra, load_algebra_text,
                  parse_group_action, print_algebra)
from .fieldforms import (FieldFormError, FieldValuedForm, GradedDerivation,
                         algebraic_bracket, contraction, field_from_derivation,
                         field_space, field_valued_form_from_json,
                         field_valued_form_space, fn_bracket,
                         lie_bracket_fields, lie_operator)
from .forms import (FormError, commutator_subspace, de_rham_homology,
                    form_space, kernel_of_mu_n, omega_functor, product)
from .hochschild import (NormalizedCochain, coboundary, cochain_dim,
                         cochain_to_hom, cohomology_report, form_hom_space,
                         hom_to_cochain, tensor_module)
from .linalg import (QMat, RowReducer, Subspace, format_scalar, parse_scalar)
from .schouten import (MultiMap, SchoutenError, alternation, commutator_bivector,
                       insertion, multimap_from_json, nr_bracket,
                       poisson_bracket_hom_check, poisson_check)

DEFAULT_SIZE_CAP = 100000
SIZE_CAP_ENV = "NCFORMS_SIZE_CAP"

_MATH_ERRORS = (AlgebraError, GeometryError, FieldFormError, FormError,
                SchoutenError)


class InputError(click.ClickException):
    """Bad input file, expression, or serialized object: exit code 2."""

    exit_code = 2


# ---------------------------------------------------------------------------
# Shared option plumbing
# ---------------------------------------------------------------------------


def _algebra_options(fn: Callable) -> Callable:
    fn = click.option("--size-cap", type=int, default=None,
                      help="Bound on intermediate problem sizes "
                           f"(default from ${SIZE_CAP_ENV} or "
                           f"{DEFAULT_SIZE_CAP}).")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["text", "json"]),
                      default="text", show_default=True,
                      help="Report rendering.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="Seed for randomized checks (recorded in the "
                           "report).")(fn)
    fn = click.option("-N", "--truncation", type=int, default=3,
                      show_default=True,
                      help="Degree bound for graded computations (>= 1).")(fn)
    fn = click.option("--builtin", "builtin_expr", default=None,
                      metavar="EXPR",
                      help="Builtin algebra expression, e.g. matrix(2).")(fn)
    fn = click.option("--algebra", "algebra_path", default=None,
                      metavar="FILE",
                      help="Algebra definition file.")(fn)
    return fn


def _resolve_cap(size_cap: Optional[int]) -> int:
    if size_cap is not None:
        cap = size_cap
    else:
        raw = os.environ.get(SIZE_CAP_ENV, "")
        try:
            cap = int(raw) if raw else DEFAULT_SIZE_CAP
        except ValueError:
            raise InputError(f"${SIZE_CAP_ENV} must be an integer, got {raw!r}")
    if cap < 1:
        raise InputError("size cap must be >= 1")
    return cap


def _load_algebra(algebra_path: Optional[str],
                  builtin_expr: Optional[str],
                  truncation: int) -> tuple[Algebra, str]:
    if truncation < 1:
        raise click.UsageError("truncation must be >= 1")
    if (algebra_path is None) == (builtin_expr is None):
        raise click.UsageError(
            "provide exactly one of --algebra FILE or --builtin EXPR")
    try:
        if builtin_expr is not None:
            return builtin_algebra(builtin_expr), f"builtin {builtin_expr}"
        text = Path(algebra_path).read_text(encoding="utf-8")
        return load_algebra_text(text), f"file {algebra_path}"
    except DslError as exc:
        raise InputError(f"algebra definition: {exc}")
    except OSError as exc:
        raise InputError(f"cannot read {algebra_path}: {exc.strerror}")


def _load_json_file(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {path}: invalid JSON ({exc})")
    if not isinstance(obj, dict):
        raise InputError(f"{what} {path}: expected a JSON object")
    return obj


def _load_field(algebra: Algebra, path: str) -> FieldValuedForm:
    obj = _load_json_file(path, "field-valued form")
    try:
        return field_valued_form_from_json(algebra, obj)
    except (FieldFormError, KeyError, ValueError, IndexError) as exc:
        raise InputError(f"field-valued form {path}: {exc}")


def _load_multimap(algebra: Algebra, path: str) -> MultiMap:
    obj = _load_json_file(path, "multilinear map")
    try:
        return multimap_from_json(algebra, obj)
    except (SchoutenError, KeyError, ValueError, IndexError) as exc:
        raise InputError(f"multilinear map {path}: {exc}")


def _load_action(algebra: Algebra, action_path: Optional[str]) -> GroupAction:
    """Action from a file, or the trivial one-element action."""
    if action_path is None:
        ident = AlgebraHom(algebra, algebra, QMat.eye(algebra.dim), name="id")
        return GroupAction(algebra, [ident])
    try:
        text = Path(action_path).read_text(encoding="utf-8")
        spec = parse_group_action(text, algebra)
    except DslError as exc:
        raise InputError(f"group action: {exc}")
    except OSError as exc:
        raise InputError(f"cannot read {action_path}: {exc.strerror}")
    return GroupAction(algebra, [spec.homs[g] for g in spec.elements])


# ---------------------------------------------------------------------------
# Report assembly and rendering
# ---------------------------------------------------------------------------


def _make_report(command: str, algebra: Algebra, source: str, seed: int,
                 truncation: int, size_cap: int,
                 checks: list[dict], data: dict) -> dict:
    checks = sorted(checks, key=lambda c: c["name"])
    passed = sum(1 for c in checks if c["passed"])
    return {
        "version": __version__,
        "command": command,
        "algebra": {"name": algebra.name, "dim": algebra.dim, "source": source},
        "seed": seed,
        "truncation": truncation,
        "size_cap": size_cap,
        "checks": checks,
        "counts": {"checks": len(checks), "passed": passed,
                   "failed": len(checks) - passed},
        "data": data,
    }


def _check(name: str, passed: bool, witness: Optional[str] = None) -> dict:
    return {"name": name, "passed": bool(passed),
            "witness": None if passed else (witness or "identity fails")}


def _render_text(report: dict) -> str:
    lines = [f"ncforms {report['version']} {report['command']}"]
    alg = report["algebra"]
    lines.append(f"algebra: {alg['name']} (dim {alg['dim']}) [{alg['source']}]")
    lines.append(f"seed={report['seed']} truncation={report['truncation']} "
                 f"size-cap={report['size_cap']}")
    for c in report["checks"]:
        if c["passed"]:
            lines.append(f"PASS {c['name']}")
        else:
            lines.append(f"FAIL {c['name']}: {c['witness']}")
    cnt = report["counts"]
    lines.append(f"checks: {cnt['checks']} passed: {cnt['passed']} "
                 f"failed: {cnt['failed']}")
    if report["data"]:
        lines.append("data:")
        for key in sorted(report["data"]):
            lines.append(f"  {key} = "
                         f"{json.dumps(report['data'][key], sort_keys=True)}")
    return "\n".join(lines) + "\n"


def _finish(report: dict, fmt: str) -> None:
    if fmt == "json":
        out = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        out = _render_text(report)
    sys.stdout.write(out)
    if report["counts"]["failed"]:
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# Randomization helpers (coefficients from {-2..2}, seeded per check)
# ---------------------------------------------------------------------------


def _rng_for(seed: int, name: str) -> random.Random:
    # string seeds hash via SHA-512 inside random.Random: stable across runs
    return random.Random(f"{seed}:{name}")


def _rand_vec(rng: random.Random, n: int) -> list[Fraction]:
    return [Fraction(rng.randint(-2, 2)) for _ in range(n)]


def _rand_matrix(rng: random.Random, rows: int, cols: int) -> QMat:
    return QMat.from_rows([[Fraction(rng.randint(-2, 2)) for _ in range(cols)]
                           for _ in range(rows)])


def _fmt_vec(vec) -> str:
    return "[" + ", ".join(format_scalar(Fraction(v)) for v in vec) + "]"


# ---------------------------------------------------------------------------
# The verification suite
# ---------------------------------------------------------------------------


class _VerifyEnv:
    """Shared state for verify checks: algebra, bounds, cached searches."""

    def __init__(self, algebra: Algebra, truncation: int, seed: int,
                 size_cap: int, action: Optional[GroupAction]):
        self.algebra = algebra
        self.N = truncation
        self.seed = seed
        self.size_cap = size_cap
        self._action = action
        self._cache: dict = {}

    def rng(self, name: str) -> random.Random:
        return _rng_for(self.seed, name)

    def derivations(self) -> Subspace:
        if "der" not in self._cache:
            self._cache["der"] = derivation_space(
                self.algebra.regular_bimodule())
        return self._cache["der"]

    def field_basis(self, degree: int) -> list[FieldValuedForm]:
        key = ("fields", degree)
        if key not in self._cache:
            self._cache[key] = field_valued_form_space(self.algebra, degree)
        return self._cache[key]

    def random_field(self, degree: int, rng: random.Random) -> FieldValuedForm:
        delta = QMat.zeros(form_space(self.algebra, degree).dim,
                           self.algebra.dim)
        for b in self.field_basis(degree):
            c = rng.randint(-2, 2)
            if c:
                delta = delta + b.delta.scale(Fraction(c))
        return FieldValuedForm(self.algebra, degree, delta, check=False)

    def random_multimap(self, arity: int, rng: random.Random) -> MultiMap:
        m = self.algebra.dim
        raw = _rand_matrix(rng, m, m ** arity)
        return alternation(MultiMap(self.algebra, arity, raw, check=False))

    def projections(self) -> list:
        if "projs" not in self._cache:
            self._cache["projs"] = find_projections(self.algebra,
                                                    seed=self.seed)
        return self._cache["projs"]

    def action(self) -> GroupAction:
        if self._action is None:
            A = self.algebra
            ident = AlgebraHom(A, A, QMat.eye(A.dim), name="id")
            self._action = GroupAction(A, [ident])
        return self._action

    def bundle(self) -> Bundle:
        if "bundle" not in self._cache:
            action = self.action()
            self._cache["bundle"] = Bundle(self.algebra,
                                           action.fixed_subspace(),
                                           action=action)
        return self._cache["bundle"]


def _mat_rank(mat: QMat) -> int:
    red = RowReducer(mat.shape[1])
    for row in mat.to_fraction_rows():
        red.add_dense(row)
    return red.dim


def _random_subspace(rng: random.Random, n: int) -> Subspace:
    gens = [_rand_vec(rng, n) for _ in range(rng.randint(0, n))]
    return Subspace.from_generators(n, gens)


def _chk_scalar_roundtrip(env: _VerifyEnv, rng: random.Random):
    for _ in range(25):
        a = Fraction(rng.randint(-2, 2), rng.randint(1, 9))
        b = Fraction(rng.randint(-2, 2), rng.randint(1, 9))
        text = format_scalar(a)
        if parse_scalar(text) != a:
            return f"parse(format({a})) = {parse_scalar(text)} != {a}"
        if (a + b) - b != a:
            return f"({a} + {b}) - {b} != {a}"
    return None


def _chk_rank_transpose(env: _VerifyEnv, rng: random.Random):
    for _ in range(10):
        mat = _rand_matrix(rng, rng.randint(1, 4), rng.randint(1, 5))
        rr, cr = _mat_rank(mat), _mat_rank(mat.T)
        if rr != cr:
            rows = [_fmt_vec(r) for r in mat.to_fraction_rows()]
            return (f"row rank {rr} != column rank {cr} "
                    f"for rows [{', '.join(rows)}]")
    return None


def _chk_subspace_lattice(env: _VerifyEnv, rng: random.Random):
    n = 4
    for _ in range(8):
        U = _random_subspace(rng, n)
        V = _random_subspace(rng, n)
        W = _random_subspace(rng, n)
        dims = f"dims ({U.dim}, {V.dim}, {W.dim})"
        if U.add(V) != V.add(U):
            return f"sum not commutative on subspaces of {dims}"
        if U.add(V).add(W) != U.add(V.add(W)):
            return f"sum not associative on subspaces of {dims}"
        if U.intersect(V) != V.intersect(U):
            return f"intersection not commutative on subspaces of {dims}"
        if U.intersect(V).intersect(W) != U.intersect(V.intersect(W)):
            return f"intersection not associative on subspaces of {dims}"
    return None


def _chk_algebra_table(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    try:
        A.validate()
    except AlgebraError as exc:
        return str(exc)
    for i in range(A.dim):
        ei = [Fraction(int(t == i)) for t in range(A.dim)]
        for j in range(A.dim):
            ej = [Fraction(int(t == j)) for t in range(A.dim)]
            prod = A.mult_vec(ei, ej)
            if tuple(prod) != tuple(A.structure[i][j]):
                return (f"{A.basis_names[i]}*{A.basis_names[j]} evaluates to "
                        f"{_fmt_vec(prod)}, table says "
                        f"{_fmt_vec(A.structure[i][j])}")
    return None


def _chk_derivation_leibniz(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    mod = A.regular_bimodule()
    der = env.derivations()
    for vec in der.basis:
        if not is_derivation(mod, derivation_matrix(mod, list(vec))):
            return f"solution-space basis vector {_fmt_vec(vec)} fails Leibniz"
    for _ in range(8):
        combo = [Fraction(0)] * (A.dim * A.dim)
        for b in der.basis:
            c = rng.randint(-2, 2)
            if c:
                combo = [x + Fraction(c) * Fraction(y)
                         for x, y in zip(combo, b)]
        if not is_derivation(mod, derivation_matrix(mod, combo)):
            return f"random combination {_fmt_vec(combo)} fails Leibniz"
        mvec = _rand_vec(rng, A.dim)
        inner = inner_derivation(mod, mvec)
        if not is_derivation(mod, inner):
            return f"commutator map of {_fmt_vec(mvec)} fails Leibniz"
        if not der.contains(derivation_vector(mod, inner)):
            return (f"commutator map of {_fmt_vec(mvec)} is not in the "
                    f"solution space")
    return None


def _chk_derivation_form_hom_dim(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    d_der = env.derivations().dim
    d_hom = form_hom_space(A, 1, A.regular_bimodule()).dim
    if d_der != d_hom:
        return (f"derivation space has dim {d_der} but bimodule homs from "
                f"one-forms have dim {d_hom}")
    return None


def _chk_dsl_roundtrip(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    try:
        B = load_algebra_text(print_algebra(A))
    except DslError as exc:
        return f"printed definition does not parse back: {exc}"
    if list(B.basis_names) != list(A.basis_names):
        return (f"basis names changed from {list(A.basis_names)} to "
                f"{list(B.basis_names)}")
    for i in range(A.dim):
        for j in range(A.dim):
            if B.structure[i][j] != A.structure[i][j]:
                return (f"product {A.basis_names[i]}*{A.basis_names[j]} "
                        f"changed from {_fmt_vec(A.structure[i][j])} to "
                        f"{_fmt_vec(B.structure[i][j])}")
    return None


def _chk_dsl_revalidate(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    try:
        Algebra(A.name, A.basis_names, A.structure, check=True)
    except AlgebraError as exc:
        return str(exc)
    return None


def _chk_form_dims(env: _VerifyEnv, rng: random.Random):
    A, m = env.algebra, env.algebra.dim
    for k in range(env.N + 1):
        want = m * (m - 1) ** k
        got = form_space(A, k).dim
        if got != want:
            return f"degree {k}: dim is {got}, expected {m}*{m - 1}^{k} = {want}"
    return None


def _chk_d_squared_zero(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    for k in range(env.N):
        dd = form_space(A, k + 1).d_matrix() @ form_space(A, k).d_matrix()
        if not dd.is_zero():
            rows = dd.to_fraction_rows()
            for r, row in enumerate(rows):
                for c, v in enumerate(row):
                    if v:
                        return (f"(d o d) on degree {k} has entry "
                                f"{format_scalar(v)} at ({r}, {c})")
    return None


def _chk_graded_leibniz(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    for _ in range(10):
        k = rng.randint(0, max(0, env.N - 1))
        l = rng.randint(0, max(0, env.N - 1 - k))
        sk, sl = form_space(A, k), form_space(A, l)
        a = sk.form(_rand_vec(rng, sk.dim))
        b = sl.form(_rand_vec(rng, sl.dim))
        sign = -1 if k % 2 else 1
        lhs = product(a, b).d()
        rhs = product(a.d(), b) + product(a, b.d()).scale(sign)
        if lhs != rhs:
            return (f"d(a.b) != da.b + (-1)^{k} a.db for degrees ({k}, {l}), "
                    f"a = {_fmt_vec(a.coords())}, b = {_fmt_vec(b.coords())}")
    return None


def _chk_bimodule_associativity(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    for k in range(min(env.N, 2) + 1):
        sp = form_space(A, k)
        for i in range(A.dim):
            for j in range(A.dim):
                if sp.left[i] @ sp.right[j] != sp.right[j] @ sp.left[i]:
                    return (f"left and right actions do not commute on "
                            f"degree {k} at basis pair "
                            f"({A.basis_names[i]}, {A.basis_names[j]})")
    for _ in range(6):
        k = rng.randint(0, max(0, env.N - 1))
        l = rng.randint(0, max(0, env.N - k))
        sk, sl = form_space(A, k), form_space(A, l)
        a = sk.form(_rand_vec(rng, sk.dim))
        b = sl.form(_rand_vec(rng, sl.dim))
        x = _rand_vec(rng, A.dim)
        if product(a.left_mult(x), b) != product(a, b).left_mult(x):
            return (f"(x.a).b != x.(a.b) for degrees ({k}, {l}), "
                    f"x = {_fmt_vec(x)}")
        if product(a, b.right_mult(x)) != product(a, b).right_mult(x):
            return (f"a.(b.x) != (a.b).x for degrees ({k}, {l}), "
                    f"x = {_fmt_vec(x)}")
        if product(a.right_mult(x), b) != product(a, b.left_mult(x)):
            return (f"(a.x).b != a.(x.b) for degrees ({k}, {l}), "
                    f"x = {_fmt_vec(x)}")
        j = rng.randint(0, max(0, env.N - k - l))
        sj = form_space(A, j)
        c = sj.form(_rand_vec(rng, sj.dim))
        if product(product(a, b), c) != product(a, product(b, c)):
            return (f"(a.b).c != a.(b.c) for degrees ({k}, {l}, {j})")
    return None


def _chk_commutator_chain(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    for r in range(env.N):
        cur = commutator_subspace(A, r)
        nxt = commutator_subspace(A, r + 1)
        dmat = form_space(A, r).d_matrix()
        for v in cur.basis:
            image = dmat @ QMat.column(v)
            if not nxt.contains(image.column_fractions(0)):
                return (f"d of the commutator vector {_fmt_vec(v)} in degree "
                        f"{r} leaves the degree-{r + 1} commutator subspace")
    return None


def _chk_field_form_leibniz(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    unit = QMat.column([Fraction(v) for v in A.unit().coeffs])
    for degree in range(min(env.N, 2) + 1):
        for _ in range(4):
            K = env.random_field(degree, rng)
            try:
                FieldValuedForm(A, degree, K.delta, check=True)
            except FieldFormError as exc:
                return f"degree {degree}: {exc}"
            if not (K.delta @ unit).is_zero():
                return (f"degree {degree}: the value on the unit is "
                        f"{_fmt_vec((K.delta @ unit).column_fractions(0))}")
    return None


def _chk_contraction_injective(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    d0 = form_space(A, 0).d_matrix()
    for degree in range(min(env.N, 2) + 1):
        for _ in range(4):
            K = env.random_field(degree, rng)
            block = contraction(K, 1).mats[1]
            if block is None or block @ d0 != K.delta:
                return (f"degree {degree}: insertion operator does not "
                        f"recover the generating derivation")
    return None


def _chk_operator_jacobi(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    head = 3

    def rand_op():
        k = rng.randint(0, 1)
        K = env.random_field(k, rng)
        L = env.random_field(k + 1, rng)
        return lie_operator(K, head) + contraction(L, head), k

    def restrict(op, bound):
        mats = {j: op.mats[j] for j in range(bound + 1) if j in op.mats}
        if not mats:
            return None
        return GradedDerivation(A, op.degree, mats)

    for _ in range(3):
        (d1, g1), (d2, g2), (d3, g3) = rand_op(), rand_op(), rand_op()
        anti = d1.commutator(d2) + d2.commutator(d1).scale(
            -1 if (g1 * g2) % 2 else 1)
        ra = restrict(anti, 1)
        if ra is not None and not ra.is_zero():
            return (f"graded antisymmetry fails for operator degrees "
                    f"({g1}, {g2})")
        s1 = d1.commutator(d2.commutator(d3)).scale(
            -1 if (g1 * g3) % 2 else 1)
        s2 = d2.commutator(d3.commutator(d1)).scale(
            -1 if (g2 * g1) % 2 else 1)
        s3 = d3.commutator(d1.commutator(d2)).scale(
            -1 if (g3 * g2) % 2 else 1)
        rj = restrict(s1 + s2 + s3, 1)
        if rj is not None and not rj.is_zero():
            return (f"graded Jacobi fails for operator degrees "
                    f"({g1}, {g2}, {g3})")
    return None


def _chk_field_space_dim(env: _VerifyEnv, rng: random.Random):
    d_fields = len(field_space(env.algebra))
    d_der = env.derivations().dim
    if d_fields != d_der:
        return (f"degree-0 field space has dim {d_fields} but the derivation "
                f"space has dim {d_der}")
    return None


def _chk_fn_antisymmetry(env: _VerifyEnv, rng: random.Random):
    for _ in range(6):
        k = rng.randint(0, min(env.N, 2))
        l = rng.randint(0, max(0, min(env.N, 3) - k))
        K = env.random_field(k, rng)
        L = env.random_field(l, rng)
        sign = -1 if (k * l) % 2 else 1
        if not (fn_bracket(K, L) + fn_bracket(L, K).scale(sign)).is_zero():
            return f"[K,L] != -(-1)^(kl) [L,K] at degrees ({k}, {l})"
    return None


def _chk_projection_curvature_sum(env: _VerifyEnv, rng: random.Random):
    for idx, p in enumerate(env.projections()):
        R, Rbar = curvature(p)
        if R + Rbar != fn_bracket(p.chi, p.chi):
            return f"projection {idx}: R + Rbar != [P,P]"
    return None


def _chk_projection_complement(env: _VerifyEnv, rng: random.Random):
    for idx, p in enumerate(env.projections()):
        if curvature(p)[1] != curvature(p.complement())[0]:
            return (f"projection {idx}: cocurvature differs from the "
                    f"complement's curvature")
    return None


def _chk_action_functoriality(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    for h in env.action().homs:
        for k in range(1, env.N + 1):
            dk = form_space(A, k - 1).d_matrix()
            if omega_functor(h, k) @ dk != dk @ omega_functor(h, k - 1):
                return (f"group element {h.name}: induced map does not "
                        f"intertwine d into degree {k}")
    return None


def _chk_bundle_tensor_dims(env: _VerifyEnv, rng: random.Random):
    dims = bundle_tensor_dims(env.bundle())
    if not dims["equal"]:
        return (f"one-forms minus horizontal is "
                f"{dims['omega1_minus_horizontal']} but the tensor-square "
                f"defect is {dims['tensor_minus_algebra']}")
    return None


def _chk_coboundary_squared(env: _VerifyEnv, rng: random.Random):
    mod = env.algebra.regular_bimodule()
    for n in range(min(env.N, 3) + 1):
        for _ in range(3):
            c = NormalizedCochain.from_vector(
                mod, n, _rand_vec(rng, cochain_dim(mod, n)))
            dd = coboundary(coboundary(c))
            if not dd.is_zero():
                return f"coboundary squared is nonzero on a random {n}-cochain"
    return None


def _chk_cohomology_routes(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    modules = [("A", A.regular_bimodule()), ("AxA", tensor_module(A, 1))]
    for label, mod in modules:
        for n in range(min(env.N, 3) + 1):
            rep = cohomology_report(A, mod, n)
            if not rep["agree"]:
                return (f"module {label}, n = {n}: forms route gives "
                        f"{rep['dim_Hn_forms']}, complex route gives "
                        f"{rep['dim_Hn_complex']}")
    return None


def _chk_cochain_hom_roundtrip(env: _VerifyEnv, rng: random.Random):
    mod = env.algebra.regular_bimodule()
    for n in range(min(env.N, 3) + 1):
        for _ in range(3):
            c = NormalizedCochain.from_vector(
                mod, n, _rand_vec(rng, cochain_dim(mod, n)))
            hom = cochain_to_hom(c)
            back = hom_to_cochain(mod, n, hom)
            if back != c:
                return f"cochain -> hom -> cochain changes a random {n}-cochain"
            if cochain_to_hom(back) != hom:
                return f"hom -> cochain -> hom changes a degree-{n} hom"
    return None


def _chk_alternation_canonical(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    for arity in (1, 2):
        for _ in range(4):
            mm = env.random_multimap(arity, rng)
            if alternation(mm) != mm:
                return (f"alternation is not idempotent on a random "
                        f"arity-{arity} map")
            try:
                MultiMap(A, arity, mm.data, check=True)
            except SchoutenError as exc:
                return f"alternation output fails the skew check: {exc}"
    return None


def _chk_insertion_arity(env: _VerifyEnv, rng: random.Random):
    for _ in range(4):
        kappa = rng.randint(1, 2)
        p = rng.randint(1, 2)
        K = env.random_multimap(kappa, rng)
        phi = env.random_multimap(p, rng)
        got = insertion(K, phi).arity
        if got != kappa - 1 + p:
            return (f"insertion of arity {kappa} into arity {p} has arity "
                    f"{got}, expected {kappa - 1 + p}")
    return None


def _chk_schouten_jacobi(env: _VerifyEnv, rng: random.Random):
    for _ in range(3):
        ar = [rng.randint(1, 2) for _ in range(3)]
        K, L, M = (env.random_multimap(a, rng) for a in ar)
        k, l, m = (a - 1 for a in ar)
        s1 = nr_bracket(K, nr_bracket(L, M)).scale(-1 if (k * m) % 2 else 1)
        s2 = nr_bracket(L, nr_bracket(M, K)).scale(-1 if (l * k) % 2 else 1)
        s3 = nr_bracket(M, nr_bracket(K, L)).scale(-1 if (m * l) % 2 else 1)
        if not (s1 + s2 + s3).is_zero():
            return f"graded Jacobi fails for arities {tuple(ar)}"
    return None


def _chk_bracket_compatibility(env: _VerifyEnv, rng: random.Random):
    A = env.algebra
    mod = A.regular_bimodule()
    der = env.derivations()

    def rand_der():
        combo = [Fraction(0)] * (A.dim * A.dim)
        for b in der.basis:
            c = rng.randint(-2, 2)
            if c:
                combo = [x + Fraction(c) * Fraction(y)
                         for x, y in zip(combo, b)]
        return derivation_matrix(mod, combo)

    for _ in range(6):
        m1, m2 = rand_der(), rand_der()
        K1 = MultiMap(A, 1, m1)
        K2 = MultiMap(A, 1, m2)
        X1 = field_from_derivation(A, m1)
        X2 = field_from_derivation(A, m2)
        if nr_bracket(K1, K2).data != lie_bracket_fields(X2, X1).delta:
            return ("arity-1 algebraic bracket disagrees with the "
                    "derivation commutator (argument-swapped)")
    return None


_VERIFY_CHECKS: list[tuple[str, Callable]] = [
    ("scalar-roundtrip", _chk_scalar_roundtrip),
    ("rank-transpose", _chk_rank_transpose),
    ("subspace-lattice", _chk_subspace_lattice),
    ("algebra-table", _chk_algebra_table),
    ("derivation-leibniz", _chk_derivation_leibniz),
    ("derivation-form-hom-dim", _chk_derivation_form_hom_dim),
    ("dsl-roundtrip", _chk_dsl_roundtrip),
    ("dsl-revalidate", _chk_dsl_revalidate),
    ("form-dims", _chk_form_dims),
    ("d-squared-zero", _chk_d_squared_zero),
    ("graded-leibniz", _chk_graded_leibniz),
    ("bimodule-associativity", _chk_bimodule_associativity),
    ("commutator-chain", _chk_commutator_chain),
    ("field-form-leibniz", _chk_field_form_leibniz),
    ("contraction-injective", _chk_contraction_injective),
    ("operator-jacobi", _chk_operator_jacobi),
    ("field-space-dim", _chk_field_space_dim),
    ("fn-antisymmetry", _chk_fn_antisymmetry),
    ("projection-curvature-sum", _chk_projection_curvature_sum),
    ("projection-complement", _chk_projection_complement),
    ("action-functoriality", _chk_action_functoriality),
    ("bundle-tensor-dims", _chk_bundle_tensor_dims),
    ("coboundary-squared", _chk_coboundary_squared),
    ("cohomology-routes", _chk_cohomology_routes),
    ("cochain-hom-roundtrip", _chk_cochain_hom_roundtrip),
    ("alternation-canonical", _chk_alternation_canonical),
    ("insertion-arity", _chk_insertion_arity),
    ("schouten-jacobi", _chk_schouten_jacobi),
    ("bracket-compatibility", _chk_bracket_compatibility),
]


def _run_verify(env: _VerifyEnv) -> list[dict]:
    checks = []
    for name, fn in _VERIFY_CHECKS:
        try:
            witness = fn(env, env.rng(name))
        except _MATH_ERRORS as exc:
            witness = f"raised: {exc}"
        checks.append(_check(name, witness is None, witness))
    return checks


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


@click.group()
@click.version_option(__version__, prog_name="ncforms")
def main() -> None:
    """Exact differential calculus over finite-dimensional algebras."""


@main.command()
@_algebra_options
def info(algebra_path, builtin_expr, truncation, seed, fmt, size_cap):
    """Dimensions of the algebra, its form spaces, and its derivations."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    data = {
        "basis": list(A.basis_names),
        "omega_dims": [form_space(A, k).dim for k in range(truncation + 1)],
        "derivation_dim": derivation_space(A.regular_bimodule()).dim,
        "center_dim": A.center().dim,
    }
    report = _make_report("info", A, source, seed, truncation, cap, [], data)
    _finish(report, fmt)


@main.command()
@click.option("--action", "action_path", default=None, metavar="FILE",
              help="Group action file for the quotient-geometry checks "
                   "(defaults to the trivial action).")
@_algebra_options
def verify(algebra_path, builtin_expr, truncation, seed, fmt, size_cap,
           action_path):
    """Run the full invariant suite and report each identity."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    action = _load_action(A, action_path) if action_path is not None else None
    env = _VerifyEnv(A, truncation, seed, cap, action)
    checks = _run_verify(env)
    report = _make_report("verify", A, source, seed, truncation, cap,
                          checks, {})
    _finish(report, fmt)


@main.command(name="fn-bracket")
@click.argument("left_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("right_file", type=click.Path(exists=True, dir_okay=False))
@_algebra_options
def fn_bracket_cmd(algebra_path, builtin_expr, truncation, seed, fmt, size_cap,
                   left_file, right_file):
    """Differential-compatible bracket of two serialized field-valued forms."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    K = _load_field(A, left_file)
    L = _load_field(A, right_file)
    try:
        out = fn_bracket(K, L)
    except FieldFormError as exc:
        raise InputError(str(exc))
    data = {"left": K.to_json(), "right": L.to_json(),
            "bracket": out.to_json()}
    report = _make_report("fn-bracket", A, source, seed, truncation, cap,
                          [], data)
    _finish(report, fmt)


@main.command(name="alg-bracket")
@click.argument("left_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("right_file", type=click.Path(exists=True, dir_okay=False))
@_algebra_options
def alg_bracket_cmd(algebra_path, builtin_expr, truncation, seed, fmt,
                    size_cap, left_file, right_file):
    """Insertion-commutator bracket of two serialized field-valued forms."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    K = _load_field(A, left_file)
    L = _load_field(A, right_file)
    try:
        out = algebraic_bracket(K, L)
    except FieldFormError as exc:
        raise InputError(str(exc))
    data = {"left": K.to_json(), "right": L.to_json(),
            "bracket": out.to_json()}
    report = _make_report("alg-bracket", A, source, seed, truncation, cap,
                          [], data)
    _finish(report, fmt)


@main.command(name="nr-bracket")
@click.argument("left_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("right_file", type=click.Path(exists=True, dir_okay=False))
@_algebra_options
def nr_bracket_cmd(algebra_path, builtin_expr, truncation, seed, fmt, size_cap,
                   left_file, right_file):
    """Graded bracket of two serialized skew multilinear maps."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    K = _load_multimap(A, left_file)
    L = _load_multimap(A, right_file)
    try:
        out = nr_bracket(K, L)
    except SchoutenError as exc:
        raise InputError(str(exc))
    data = {"left": K.to_json(), "right": L.to_json(),
            "bracket": out.to_json()}
    report = _make_report("nr-bracket", A, source, seed, truncation, cap,
                          [], data)
    _finish(report, fmt)


@main.command(name="curvature")
@_algebra_options
def curvature_cmd(algebra_path, builtin_expr, truncation, seed, fmt, size_cap):
    """Curvature and cocurvature of every projection the search finds."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    checks: list[dict] = []
    entries = []
    projs = find_projections(A, seed=seed)
    for idx, p in enumerate(projs):
        R, Rbar = curvature(p)
        rep = check_projection_calculus(p, N=truncation)
        for key, ok in sorted(rep.items()):
            checks.append(_check(
                f"projection-{idx:02d}-{key.replace('_', '-')}", ok,
                f"projection {idx} violates {key}"))
        entries.append({
            "index": idx,
            "endomorphism": [[format_scalar(v) for v in row]
                             for row in p.ext.to_fraction_rows()],
            "curvature": R.to_json(),
            "cocurvature": Rbar.to_json(),
        })
    data = {"projections": entries, "count": len(projs)}
    report = _make_report("curvature", A, source, seed, truncation, cap,
                          checks, data)
    _finish(report, fmt)


@main.command()
@_algebra_options
def bianchi(algebra_path, builtin_expr, truncation, seed, fmt, size_cap):
    """Differential identities for the curvature of every found projection."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    checks: list[dict] = []
    projs = find_projections(A, seed=seed)
    for idx, p in enumerate(projs):
        rep = bianchi_identities(p)
        for key, ok in sorted(rep.items()):
            checks.append(_check(
                f"projection-{idx:02d}-{key.replace('_', '-')}", ok,
                f"projection {idx} violates {key}"))
    data = {"count": len(projs)}
    report = _make_report("bianchi", A, source, seed, truncation, cap,
                          checks, data)
    _finish(report, fmt)


@main.command(name="connection-check")
@click.option("--action", "action_path", default=None, metavar="FILE",
              help="Group action file cutting out the base subalgebra "
                   "(defaults to the trivial action).")
@_algebra_options
def connection_check(algebra_path, builtin_expr, truncation, seed, fmt,
                     size_cap, action_path):
    """Find connections on the induced bundle and check their properties."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    action = _load_action(A, action_path)
    bundle = Bundle(A, action.fixed_subspace(), action=action)
    checks: list[dict] = []
    entries = []
    conns = find_connections(bundle)
    for idx, chi in enumerate(conns):
        rep = is_connection(bundle, chi)
        rep.update(curvature_horizontality(bundle, chi))
        for key, ok in sorted(rep.items()):
            checks.append(_check(
                f"connection-{idx:02d}-{key.replace('_', '-')}", ok,
                f"connection {idx} violates {key}"))
        entries.append({
            "index": idx,
            "connection": chi.to_json(),
            "principal": is_principal(bundle, chi),
        })
    data = {"connections": entries, "count": len(conns),
            "base_dim": bundle.base.dim}
    report = _make_report("connection-check", A, source, seed, truncation,
                          cap, checks, data)
    _finish(report, fmt)


@main.command()
@_algebra_options
def hochschild(algebra_path, builtin_expr, truncation, seed, fmt, size_cap):
    """Cohomology of the algebra in itself, computed along two routes."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    checks: list[dict] = []
    reports = []
    mod = A.regular_bimodule()
    for n in range(min(truncation, 3) + 1):
        rep = cohomology_report(A, mod, n)
        checks.append(_check(
            f"routes-agree-n{n}", rep["agree"],
            f"n = {n}: forms route gives {rep['dim_Hn_forms']}, complex "
            f"route gives {rep['dim_Hn_complex']}"))
        reports.append(rep)
    data = {"reports": reports}
    report = _make_report("hochschild", A, source, seed, truncation, cap,
                          checks, data)
    _finish(report, fmt)


@main.command()
@_algebra_options
def derham(algebra_path, builtin_expr, truncation, seed, fmt, size_cap):
    """Quotient homology dimensions of the truncated form complex."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    try:
        data = de_rham_homology(A, truncation, size_cap=cap)
    except FormError as exc:
        raise InputError(str(exc))
    report = _make_report("derham", A, source, seed, truncation, cap, [], data)
    _finish(report, fmt)


@main.command(name="poisson-check")
@click.argument("mu_file", required=False,
                type=click.Path(exists=True, dir_okay=False))
@_algebra_options
def poisson_check_cmd(algebra_path, builtin_expr, truncation, seed, fmt,
                      size_cap, mu_file):
    """Check a bivector for the bracket axioms (default: the commutator)."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    if mu_file is not None:
        mu = _load_multimap(A, mu_file)
    else:
        mu = commutator_bivector(A)
    try:
        verdict = poisson_check(mu)
    except SchoutenError as exc:
        raise InputError(str(exc))
    checks = [_check(key.replace("_", "-"), ok, f"bivector violates {key}")
              for key, ok in sorted(verdict.items())]
    data = {"bivector": mu.to_json()}
    if verdict["poisson"]:
        data["bracket_maps"] = poisson_bracket_hom_check(mu)
    report = _make_report("poisson-check", A, source, seed, truncation, cap,
                          checks, data)
    _finish(report, fmt)


@main.command(name="kernel-mu-n")
@_algebra_options
def kernel_mu_n_cmd(algebra_path, builtin_expr, truncation, seed, fmt,
                    size_cap):
    """Compare ker(multiplication) with the span of first-slot relations."""
    A, source = _load_algebra(algebra_path, builtin_expr, truncation)
    cap = _resolve_cap(size_cap)
    checks: list[dict] = []
    rows = []
    for n in range(2, max(truncation, 2) + 1):
        try:
            rep = kernel_of_mu_n(A, n, size_cap=cap)
        except FormError as exc:
            raise InputError(str(exc))
        checks.append(_check(
            f"kernel-matches-span-n{n}", rep["equal"],
            f"n = {n}: kernel dim {rep['dim_kernel']} vs span dim "
            f"{rep['dim_span']}"))
        rows.append(rep)
    data = {"reports": rows}
    report = _make_report("kernel-mu-n", A, source, seed, truncation, cap,
                          checks, data)
    _finish(report, fmt)


if __name__ == "__main__":  # pragma: no cover
    main()
