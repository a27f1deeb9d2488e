"""Distributions in one-forms, projections with curvature, and bundles.

A distribution is a sub-bimodule of Omega_1.  Projections (idempotent
bimodule endomorphisms of Omega_1) split Omega_1 into image and kernel;
their curvature/cocurvature measure failure of involutivity of those two
distributions.  A bundle is a subalgebra B of A; horizontal forms are the
bimodule span of d(B), and a connection is a projection onto them.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import Algebra, AlgebraHom, Bimodule, tensor_over_A
from .fieldforms import (
    FieldValuedForm, fn_bracket, identity_one_form, insertion_compose,
    zero_field_valued_form,
)
from .forms import Form, form_space, product
from .linalg import (
    QMat, RowReducer, Subspace, nullspace, nullspace_sparse, qmat_sum,
    solve_linear,
)


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


class Distribution:
    """A sub-bimodule of Omega_1(A)."""

    def __init__(self, algebra: Algebra, space: Subspace, check: bool = True):
        self.algebra = algebra
        self.space = space
        if space.ambient != form_space(algebra, 1).dim:
            raise GeometryError("subspace does not live in Omega_1")
        if check and not is_distribution(algebra, space):
            raise GeometryError("subspace is not stable under the actions")

    @property
    def dim(self) -> int:
        return self.space.dim

    def contains(self, w: Form) -> bool:
        return self.space.contains(w.coords())

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Distribution)
                and self.algebra is other.algebra
                and self.space == other.space)

    def __hash__(self):
        return hash((id(self.algebra), self.space))

    def __repr__(self) -> str:
        return f"Distribution(dim={self.dim} in Omega_1({self.algebra.name}))"


def is_distribution(algebra: Algebra, space: Subspace) -> bool:
    sp = form_space(algebra, 1)
    if space.ambient != sp.dim:
        raise GeometryError("subspace does not live in Omega_1")
    for vec in space.basis:
        col = QMat.column(vec)
        for i in range(algebra.dim):
            if not space.contains((sp.left[i] @ col).column_fractions(0)):
                return False
            if not space.contains((sp.right[i] @ col).column_fractions(0)):
                return False
    return True


def bimodule_span(algebra: Algebra, generators) -> Distribution:
    """Smallest distribution containing the generators (vectors or forms)."""
    sp = form_space(algebra, 1)
    red = RowReducer(sp.dim)
    queue = []
    for g in generators:
        vec = g.coords() if isinstance(g, Form) else list(g)
        if red.add_dense(vec):
            queue.append(vec)
    while queue:
        vec = queue.pop()
        col = QMat.column(vec) if vec else QMat.zeros(sp.dim, 1)
        for mats in (sp.left, sp.right):
            for M in mats:
                out = (M @ col).column_fractions(0)
                if red.add_dense(out):
                    queue.append(out)
    space = Subspace(sp.dim, red.basis(), red.pivots(), _canonical=True)
    return Distribution(algebra, space, check=False)


def exact_span(algebra: Algebra, sub: Subspace) -> Distribution:
    """Bimodule span of d(sub) for a subspace of A."""
    d0 = form_space(algebra, 0).d_matrix()
    gens = [(d0 @ QMat.column(b)).column_fractions(0) for b in sub.basis]
    return bimodule_span(algebra, gens)


def globally_integrable(dist: Distribution, sub: Subspace) -> bool:
    """Is dist exactly the bimodule span of d(sub)?"""
    return dist == exact_span(dist.algebra, sub)


def ideal_component(dist: Distribution, r: int) -> Subspace:
    """Degree-r piece of the two-sided graded ideal generated by dist."""
    A = dist.algebra
    if r < 1:
        raise GeometryError("the ideal lives in degrees >= 1")
    if r == 1:
        return dist.space
    prev = ideal_component(dist, r - 1)
    sp1 = form_space(A, 1)
    spp = form_space(A, r - 1)
    red = RowReducer(form_space(A, r).dim)
    for vec in prev.basis:
        w = spp.form(vec)
        for i in range(sp1.dim):
            b = sp1.basis_form(i)
            red.add_dense(product(b, w).coords())
            red.add_dense(product(w, b).coords())
    return Subspace(form_space(A, r).dim, red.basis(), red.pivots(),
                    _canonical=True)


def involutive(dist: Distribution, N: int = 2) -> bool:
    """d(dist) contained in the degree-2 component of its ideal."""
    if N < 2:
        raise GeometryError("need truncation >= 2")
    A = dist.algebra
    d1 = form_space(A, 1).d_matrix()
    ideal2 = ideal_component(dist, 2)
    for vec in dist.space.basis:
        if not ideal2.contains((d1 @ QMat.column(vec)).column_fractions(0)):
            return False
    return True


# ---------------------------------------------------------------------------
# Projections, curvature, cocurvature
# ---------------------------------------------------------------------------


class Projection:
    """Idempotent bimodule endomorphism of Omega_1."""

    def __init__(self, chi: FieldValuedForm):
        if chi.degree != 1:
            raise GeometryError("a projection must be a one-form endomorphism")
        self.chi = chi
        self.algebra = chi.algebra
        self.ext = chi.extension()
        if self.ext @ self.ext != self.ext:
            raise GeometryError("endomorphism is not idempotent")

    @classmethod
    def from_endomorphism(cls, algebra: Algebra, ext: QMat) -> "Projection":
        d0 = form_space(algebra, 0).d_matrix()
        return cls(FieldValuedForm(algebra, 1, ext @ d0, check=False))

    @classmethod
    def zero(cls, algebra: Algebra) -> "Projection":
        return cls(zero_field_valued_form(algebra, 1))

    @classmethod
    def identity(cls, algebra: Algebra) -> "Projection":
        return cls(identity_one_form(algebra))

    def complement(self) -> "Projection":
        return Projection(identity_one_form(self.algebra) - self.chi)

    def image(self) -> Distribution:
        sp = form_space(self.algebra, 1)
        gens = [self.ext.column_fractions(j) for j in range(sp.dim)]
        space = Subspace.from_generators(sp.dim, gens)
        return Distribution(self.algebra, space, check=False)

    def kernel(self) -> Distribution:
        n = self.ext.shape[0]
        space = nullspace(self.ext.to_fraction_rows()) if n else \
            Subspace.zero(0)
        return Distribution(self.algebra, space, check=False)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Projection)
                and self.algebra is other.algebra and self.ext == other.ext)

    def __hash__(self):
        return hash((id(self.algebra),
                     tuple(map(tuple, self.ext.to_fraction_rows()))))

    def __repr__(self) -> str:
        return f"Projection(rank={self.image().dim} on {self.algebra.name})"


def curvature(p: Projection) -> tuple[FieldValuedForm, FieldValuedForm]:
    """(R, Rbar) = ([P,P] o P, [P,P] o Pbar)."""
    A = p.algebra
    fn = fn_bracket(p.chi, p.chi)
    ext = fn.extension()
    d0 = form_space(A, 0).d_matrix()
    R = FieldValuedForm(A, 2, ext @ p.chi.delta, check=False)
    Rbar = FieldValuedForm(A, 2, ext @ (d0 - p.chi.delta), check=False)
    return R, Rbar


def induced_endomorphism(algebra: Algebra, ext: QMat, k: int) -> QMat:
    """The algebra endomorphism of Omega_k applying ext to every d-slot."""
    sp1 = form_space(algebra, 1)
    tgt = form_space(algebra, k)
    if k == 0:
        return QMat.eye(algebra.dim)
    d0 = form_space(algebra, 0).d_matrix()
    images = [Form(sp1, ext @ d0.col(j)) for j in range(algebra.dim)]
    cols = []
    for idx in range(tgt.dim):
        i, J = tgt.tuple_of(idx)
        acc = form_space(algebra, 0).basis_form(i)
        for j in J:
            acc = product(acc, images[j])
        cols.append(acc.coords())
    if not cols or tgt.dim == 0:
        return QMat.zeros(tgt.dim, tgt.dim)
    return QMat.from_rows([[cols[c][r] for c in range(len(cols))]
                           for r in range(tgt.dim)])


def _matrix_kernel(mat: QMat) -> Subspace:
    if mat.shape[0] == 0:
        return Subspace.zero(mat.shape[1])
    return nullspace(mat.to_fraction_rows())


def check_projection_calculus(p: Projection, N: int = 3) -> dict:
    """Curvature formulas, ideal = functor kernel, involutivity criteria."""
    A = p.algebra
    R, Rbar = curvature(p)
    fn = fn_bracket(p.chi, p.chi)
    d1 = form_space(A, 1).d_matrix()
    ext = p.ext
    ext_bar = QMat.eye(ext.shape[0]) - ext
    omega_p = {k: induced_endomorphism(A, ext, k) for k in range(1, N + 1)}
    omega_pb = {k: induced_endomorphism(A, ext_bar, k) for k in range(1, N + 1)}

    report = {}
    report["curvature_formula"] = (
        R.extension() == (omega_pb[2] @ d1 @ ext).scale(-2))
    report["cocurvature_formula"] = (
        Rbar.extension() == (omega_p[2] @ d1 @ ext_bar).scale(-2))
    report["sum_is_bracket"] = (R + Rbar == fn)
    pbar = p.complement()
    Rb2, _ = curvature(pbar)
    report["cocurvature_is_complement_curvature"] = (Rb2 == Rbar)

    ker_ideal = True
    im_ideal = True
    kerP = p.kernel()
    imP = p.image()
    for k in range(1, N + 1):
        lhs = ideal_component(kerP, k)
        rhs = _matrix_kernel(omega_p[k])
        if lhs != rhs:
            ker_ideal = False
        lhs2 = ideal_component(imP, k)
        rhs2 = _matrix_kernel(omega_pb[k])
        if lhs2 != rhs2:
            im_ideal = False
    report["kernel_ideal_is_functor_kernel"] = ker_ideal
    report["image_ideal_is_complement_kernel"] = im_ideal

    report["curvature_zero_iff_image_involutive"] = (
        R.is_zero() == involutive(imP))
    report["cocurvature_zero_iff_kernel_involutive"] = (
        Rbar.is_zero() == involutive(kerP))
    report["all"] = all(v for v in report.values())
    return report


def bianchi_identities(p: Projection) -> dict:
    """[P, R+Rbar] = 0 and 2[R,P] = j_R Rbar + j_Rbar R, exactly."""
    R, Rbar = curvature(p)
    first = fn_bracket(p.chi, R + Rbar)
    lhs = fn_bracket(R, p.chi).scale(2)
    rhs = insertion_compose(R, Rbar) + insertion_compose(Rbar, R)
    report = {
        "bracket_with_total_curvature_vanishes": first.is_zero(),
        "second_identity": lhs == rhs,
    }
    report["all"] = all(v for v in report.values())
    return report


# ---------------------------------------------------------------------------
# Finding projections: the endomorphism space and idempotents in it
# ---------------------------------------------------------------------------


def bimodule_endomorphism_space(algebra: Algebra) -> list[QMat]:
    """Basis of End^A_A(Omega_1): matrices commuting with both actions."""
    sp = form_space(algebra, 1)
    n = sp.dim
    rows = []
    for mats in (sp.left, sp.right):
        for M in mats[1:]:           # the unit acts as identity
            mf = M.to_fraction_rows()
            # (M E - E M)[r, c] = 0 ; unknowns E[i, j] at index i*n + j
            for r in range(n):
                for c in range(n):
                    row: dict[int, Fraction] = {}
                    for k in range(n):
                        if mf[r][k]:
                            row[k * n + c] = row.get(k * n + c, Fraction(0)) \
                                + mf[r][k]
                        if mf[k][c]:
                            row[r * n + k] = row.get(r * n + k, Fraction(0)) \
                                - mf[k][c]
                    row = {i: v for i, v in row.items() if v}
                    if row:
                        rows.append(row)
    space = nullspace_sparse(n * n, rows)
    out = []
    for vec in space.basis:
        out.append(QMat.from_rows([[vec[i * n + j] for j in range(n)]
                                   for i in range(n)]))
    return out


# polynomial helpers over Fraction, ascending coefficient lists


def _poly_trim(p: list[Fraction]) -> list[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return _poly_trim(out)


def _poly_divmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b) and _poly_trim(list(a)):
        if not a[-1]:
            a.pop()
            continue
        shift = len(a) - len(b)
        coeff = a[-1] / b[-1]
        q[shift] = coeff
        for i in range(len(b)):
            a[shift + i] -= coeff * b[i]
        a.pop()
    return _poly_trim(q), _poly_trim(a)


def _poly_xgcd(a, b):
    """(g, u, v) with u*a + v*b = g, g monic."""
    r0, r1 = list(a), list(b)
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while _poly_trim(list(r1)):
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_trim([x - y for x, y in
                                 itertools.zip_longest(s0, _poly_mul(q, s1),
                                                       fillvalue=Fraction(0))])
        t0, t1 = t1, _poly_trim([x - y for x, y in
                                 itertools.zip_longest(t0, _poly_mul(q, t1),
                                                       fillvalue=Fraction(0))])
    lead = r0[-1]
    return ([c / lead for c in r0], [c / lead for c in s0],
            [c / lead for c in t0])


def _poly_eval_matrix(p: Sequence[Fraction], E: QMat) -> QMat:
    n = E.shape[0]
    acc = QMat.zeros(n, n)
    power = QMat.eye(n)
    for c in p:
        if c:
            acc = acc + power.scale(c)
        power = power @ E
    return acc


def minimal_polynomial(E: QMat) -> list[Fraction]:
    """Monic minimal polynomial of a square rational matrix (ascending)."""
    n = E.shape[0]
    if n == 0:
        return [Fraction(0), Fraction(1)]   # x, conventionally
    red = RowReducer(n * n)
    powers = []
    P = QMat.eye(n)
    while True:
        flat = [P.entry(i, j) for i in range(n) for j in range(n)]
        powers.append(flat)
        if not red.add_dense(flat):
            break
        P = P @ E
    k = len(powers) - 1      # P^k depends on lower powers
    rows = [[powers[j][idx] for j in range(k)] for idx in range(n * n)]
    sol = solve_linear(rows, powers[k])
    coeffs = [-c for c in sol] + [Fraction(1)]
    return _poly_trim(coeffs)


def _rational_roots(p: Sequence[Fraction]) -> list[tuple[Fraction, int]]:
    """Rational roots with multiplicities."""
    p = list(p)
    den = math.lcm(*[c.denominator for c in p]) if p else 1
    ints = [int(c * den) for c in p]
    lead = ints[-1]
    const = next((c for c in ints if c), 0)
    cands = {Fraction(0)}
    if const and lead:
        ps = [d for d in range(1, abs(const) + 1) if const % d == 0]
        qs = [d for d in range(1, abs(lead) + 1) if lead % d == 0]
        for a in ps:
            for b in qs:
                cands.add(Fraction(a, b))
                cands.add(Fraction(-a, b))
    out = []
    for c in sorted(cands):
        mult = 0
        q = list(p)
        while True:
            qq, r = _poly_divmod(q, [-c, Fraction(1)])
            if r:
                break
            mult += 1
            q = qq
        if mult:
            out.append((c, mult))
    return out


def _spectral_idempotents(E: QMat) -> list[QMat]:
    """Idempotents in Q[E] from rational-root factors of the min poly."""
    mp = minimal_polynomial(E)
    out = []
    for c, mult in _rational_roots(mp):
        factor = [Fraction(1)]
        for _ in range(mult):
            factor = _poly_mul(factor, [-c, Fraction(1)])
        cofactor, rem = _poly_divmod(mp, factor)
        if rem or len(cofactor) <= 1:
            continue
        g, u, v = _poly_xgcd(factor, cofactor)
        if len(g) != 1:
            continue
        # u*factor + v*cofactor = 1; e = (v*cofactor)(E) projects onto the
        # generalized eigenspace of c
        e = _poly_eval_matrix(_poly_mul(v, cofactor), E)
        if e @ e == e:
            out.append(e)
    return out


def find_projections(algebra: Algebra, seed: int = 0, max_count: int = 12,
                     lattice_cap: int = 3, spectral_draws: int = 40
                     ) -> list[Projection]:
    """Idempotent bimodule endomorphisms of Omega_1, deterministically.

    Always includes 0 and Id; adds left multiplications by central
    idempotents, a small-lattice scan when the endomorphism space is tiny,
    and spectral idempotents of seeded random endomorphisms.
    """
    sp = form_space(algebra, 1)
    n = sp.dim
    found: list[QMat] = []

    def push(ext: QMat) -> None:
        if ext @ ext != ext:
            return
        if any(ext == e for e in found):
            return
        found.append(ext)

    push(QMat.zeros(n, n))
    push(QMat.eye(n))

    # left multiplication by central idempotents
    center = algebra.center()
    half = [Fraction(v, 2) for v in range(-2, 3)]
    if 0 < center.dim <= 3:
        for combo in itertools.product(half, repeat=center.dim):
            vec = [sum(c * b[i] for c, b in zip(combo, center.basis))
                   for i in range(algebra.dim)]
            sq = algebra.mult_vec(vec, vec)
            if sq == list(vec):
                push(sp.left_action(vec))

    endos = bimodule_endomorphism_space(algebra)
    if len(endos) <= lattice_cap:
        for combo in itertools.product(half, repeat=len(endos)):
            cand = qmat_sum([E.scale(c) for E, c in zip(endos, combo)]) \
                if endos else QMat.zeros(n, n)
            push(cand)
            if len(found) >= max_count:
                break
    else:
        rng = random.Random(seed)
        for _ in range(spectral_draws):
            if len(found) >= max_count:
                break
            E = qmat_sum([B.scale(rng.randint(-2, 2)) for B in endos])
            for e in _spectral_idempotents(E):
                push(e)
                co = QMat.eye(n) - e
                push(co)

    found.sort(key=lambda e: (e.den,
                              tuple(int(x) for x in e.num.flatten().tolist())))
    return [Projection.from_endomorphism(algebra, e) for e in found]


# ---------------------------------------------------------------------------
# Bundles, horizontal forms, connections
# ---------------------------------------------------------------------------


class GroupAction:
    """A finite group acting on A by automorphisms."""

    def __init__(self, algebra: Algebra, homs: Sequence[AlgebraHom],
                 check: bool = True):
        self.algebra = algebra
        self.homs = list(homs)
        if check:
            self.validate()

    def validate(self) -> None:
        mats = [h.matrix for h in self.homs]
        ident = QMat.eye(self.algebra.dim)
        if not any(M == ident for M in mats):
            raise GeometryError("action lacks the identity")
        for h in self.homs:
            if h.source is not self.algebra or h.target is not self.algebra:
                raise GeometryError("action maps must be endomorphisms")
            if not h.is_isomorphism():
                raise GeometryError("action map is not invertible")
        for a in mats:
            for b in mats:
                ab = a @ b
                if not any(ab == M for M in mats):
                    raise GeometryError("action is not closed under composition")

    def fixed_subspace(self) -> Subspace:
        m = self.algebra.dim
        rows = []
        for h in self.homs:
            diff = h.matrix - QMat.eye(m)
            rows.extend(diff.to_fraction_rows())
        return nullspace(rows) if rows else Subspace.full(m)


class Bundle:
    """Algebra A with a unital subalgebra B, optionally cut out by an action."""

    def __init__(self, algebra: Algebra, base: Subspace,
                 action: Optional[GroupAction] = None, check: bool = True):
        self.algebra = algebra
        self.base = base
        self.action = action
        if check:
            self.validate()

    def validate(self) -> None:
        A = self.algebra
        if self.base.ambient != A.dim:
            raise GeometryError("base subspace does not live in A")
        if not self.base.contains(list(A.unit().coeffs)):
            raise GeometryError("base subalgebra must contain 1")
        for x in self.base.basis:
            for y in self.base.basis:
                if not self.base.contains(A.mult_vec(list(x), list(y))):
                    raise GeometryError("base is not closed under products")
        if self.action is not None:
            if self.action.fixed_subspace() != self.base:
                raise GeometryError("base is not the fixed subalgebra")

    def base_algebra(self) -> tuple[Algebra, QMat]:
        """B as an algebra of its own plus the inclusion matrix into A."""
        A = self.algebra
        # basis of B with the unit first, completed by canonical generators
        red = RowReducer(A.dim)
        unit = [Fraction(v) for v in A.unit().coeffs]
        red.add_dense(unit)
        basis = [unit]
        for b in self.base.basis:
            if red.add_dense(b):
                basis.append([Fraction(v) for v in b])
        nb = len(basis)
        rows_mat = [[basis[t][i] for t in range(nb)] for i in range(A.dim)]
        structure = []
        for x in basis:
            row = []
            for y in basis:
                prod = A.mult_vec(x, y)
                row.append(tuple(solve_linear(rows_mat, prod)))
            structure.append(tuple(row))
        names = ["1"] + [f"b{i}" for i in range(1, nb)]
        B = Algebra(f"{A.name}|base", names, tuple(structure))
        incl = QMat.from_rows(rows_mat)
        return B, incl


def horizontal_forms(bundle: Bundle, k: int) -> Subspace:
    """Degree-k span of products of horizontal one-forms (d of the base)."""
    A = bundle.algebra
    if k == 0:
        return Subspace.full(A.dim)
    hor1 = exact_span(A, bundle.base).space
    if k == 1:
        return hor1
    prev = horizontal_forms(bundle, k - 1)
    spp = form_space(A, k - 1)
    sp1 = form_space(A, 1)
    red = RowReducer(form_space(A, k).dim)
    for v in prev.basis:
        w = spp.form(v)
        for h in hor1.basis:
            red.add_dense(product(w, sp1.form(h)).coords())
    return Subspace(form_space(A, k).dim, red.basis(), red.pivots(),
                    _canonical=True)


def is_connection(bundle: Bundle, chi: FieldValuedForm) -> dict:
    """Idempotent with image exactly the horizontal one-forms?"""
    if chi.degree != 1:
        raise GeometryError("a connection must be a one-form endomorphism")
    ext = chi.extension()
    hor = horizontal_forms(bundle, 1)
    idem = (ext @ ext == ext)
    n = ext.shape[1]
    image = Subspace.from_generators(
        ext.shape[0], [ext.column_fractions(j) for j in range(n)])
    report = {"idempotent": idem, "image_is_horizontal": image == hor}
    report["connection"] = idem and report["image_is_horizontal"]
    return report


def find_connections(bundle: Bundle) -> list[FieldValuedForm]:
    """Solve for projections onto the horizontal one-forms.

    Connections form an affine space inside End^A_A(Omega_1): fix the
    horizontal basis pointwise and land inside it.  Returns one particular
    solution plus representatives shifted by a basis of the homogeneous
    part (deduplicated); empty when no connection exists.
    """
    A = bundle.algebra
    sp = form_space(A, 1)
    n = sp.dim
    endos = bimodule_endomorphism_space(A)
    if not endos:
        if n == 0:
            return [zero_field_valued_form(A, 1)]
        return []
    hor = horizontal_forms(bundle, 1)
    ann = nullspace([list(b) for b in hor.basis]) if hor.dim else \
        Subspace.full(n)
    rows, rhs = [], []
    for h in hor.basis:
        col = QMat.column(h)
        images = [(E @ col).column_fractions(0) for E in endos]
        for r in range(n):
            rows.append([img[r] for img in images])
            rhs.append(h[r])
    for j in range(n):
        for c in ann.basis:
            rows.append([sum(c[r] * E.entry(r, j) for r in range(n))
                         for E in endos])
            rhs.append(Fraction(0))
    sol = solve_linear(rows, rhs)
    if sol is None:
        return []
    particular = qmat_sum([E.scale(c) for E, c in zip(endos, sol)])
    hom = nullspace(rows)
    exts = [particular]
    for v in hom.basis:
        shift = qmat_sum([E.scale(c) for E, c in zip(endos, v)])
        exts.append(particular + shift)
    out, seen = [], []
    for e in exts:
        if any(e == s for s in seen):
            continue
        seen.append(e)
        d0 = form_space(A, 0).d_matrix()
        out.append(FieldValuedForm(A, 1, e @ d0, check=False))
    return out


def connection_curvature(chi: FieldValuedForm) -> FieldValuedForm:
    """[chi, chi]: the obstruction two-form of a connection."""
    return fn_bracket(chi, chi)


def principalize(bundle: Bundle, chi: FieldValuedForm) -> FieldValuedForm:
    """Group-average a connection into an equivariant one.

    Each conjugate Omega(g) o chi o Omega(g)^-1 is again a connection (the
    action preserves the base, hence the horizontal forms), so the average
    over the finite group is an equivariant connection.
    """
    from .forms import omega_functor
    from .linalg import qmat_inverse
    if bundle.action is None:
        raise GeometryError("bundle has no structure group")
    if not is_connection(bundle, chi)["connection"]:
        raise GeometryError("input is not a connection")
    A = bundle.algebra
    ext = chi.extension()
    n = ext.shape[0]
    acc = QMat.zeros(n, n)
    for h in bundle.action.homs:
        om = omega_functor(h, 1)
        acc = acc + om @ ext @ qmat_inverse(om)
    avg = acc.scale(Fraction(1, len(bundle.action.homs)))
    d0 = form_space(A, 0).d_matrix()
    out = FieldValuedForm(A, 1, avg @ d0, check=False)
    if not is_connection(bundle, out)["connection"]:
        raise GeometryError("averaging did not produce a connection")
    return out


def is_principal(bundle: Bundle, chi: FieldValuedForm) -> bool:
    """Connection commuting with the induced action on one-forms."""
    from .forms import omega_functor
    if bundle.action is None:
        raise GeometryError("bundle has no structure group")
    if not is_connection(bundle, chi)["connection"]:
        return False
    ext = chi.extension()
    for h in bundle.action.homs:
        om1 = omega_functor(h, 1)
        if ext @ om1 != om1 @ ext:
            return False
    return True


def curvature_horizontality(bundle: Bundle, chi: FieldValuedForm) -> dict:
    """R = [chi,chi] kills horizontal one-forms and lands in horizontal twos;
    equivariant when the connection is principal."""
    from .forms import omega_functor
    A = bundle.algebra
    R = connection_curvature(chi)
    ext = R.extension()
    hor1 = horizontal_forms(bundle, 1)
    hor2 = horizontal_forms(bundle, 2)
    kills = all((ext @ QMat.column(h)).is_zero() for h in hor1.basis)
    lands = all(hor2.contains(ext.column_fractions(j))
                for j in range(ext.shape[1]))
    report = {"kills_horizontal": kills, "lands_horizontal": lands}
    if bundle.action is not None and is_principal(bundle, chi):
        eq = True
        for h in bundle.action.homs:
            if ext @ omega_functor(h, 1) != omega_functor(h, 2) @ ext:
                eq = False
        report["equivariant"] = eq
    report["all"] = all(v for v in report.values())
    return report


def action_extends_to_forms(action: GroupAction, N: int) -> bool:
    """Omega_k(g) intertwines d for every group element, k <= N."""
    from .forms import omega_functor
    A = action.algebra
    for h in action.homs:
        for k in range(1, N + 1):
            dk = form_space(A, k - 1).d_matrix()
            if omega_functor(h, k) @ dk != dk @ omega_functor(h, k - 1):
                return False
    return True


def bundle_tensor_dims(bundle: Bundle) -> dict:
    """dim Omega_1(A) - dim hor_1 = dim(A tensor_B A) - dim A."""
    A = bundle.algebra
    B, incl = bundle.base_algebra()
    # A as a B-bimodule via the inclusion
    left = [A.left_mult_matrix(incl.column_fractions(j))
            for j in range(B.dim)]
    right = [A.right_mult_matrix(incl.column_fractions(j))
             for j in range(B.dim)]
    mod = Bimodule(B, A.dim, left, right, name="A|B")
    tq = tensor_over_A(mod, mod)
    hor1 = horizontal_forms(bundle, 1)
    lhs = form_space(A, 1).dim - hor1.dim
    rhs = tq.dim - A.dim
    return {"omega1_minus_horizontal": lhs, "tensor_minus_algebra": rhs,
            "equal": lhs == rhs}
