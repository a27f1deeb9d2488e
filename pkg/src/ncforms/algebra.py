"""Finite-dimensional unital associative algebras over Q.

An algebra is stored by its structure constants c[i][j][k] with respect to a
basis whose first vector is the unit:

    e_i * e_j = sum_k c[i][j][k] e_k,       e_0 = 1.

All the derived data (left/right multiplication operators, centers,
derivations, bimodules) are exact rational matrices.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .linalg import (
    QMat, RowReducer, Subspace, nullspace_sparse, qmat_inverse, qmat_sum,
)


class AlgebraError(ValueError):
    pass


class Algebra:
    """Unital associative algebra given by structure constants, unit first."""

    def __init__(self, name: str, basis_names: Sequence[str],
                 structure: Sequence[Sequence[Sequence]], check: bool = True):
        self.name = name
        self.basis_names = list(basis_names)
        self.dim = len(basis_names)
        m = self.dim
        if len(structure) != m or any(len(row) != m for row in structure):
            raise AlgebraError("structure tensor shape mismatch")
        self.structure = [[tuple(Fraction(v) for v in structure[i][j])
                           for j in range(m)] for i in range(m)]
        # left multiplication: column j of L[i] is e_i e_j
        self.left = [QMat.from_rows(
            [[self.structure[i][j][k] for j in range(m)] for k in range(m)])
            for i in range(m)]
        # right multiplication: column i of R[j] is e_i e_j
        self.right = [QMat.from_rows(
            [[self.structure[i][j][k] for i in range(m)] for k in range(m)])
            for j in range(m)]
        if check:
            self.validate()

    # -- structure checks ----------------------------------------------------

    def validate(self) -> None:
        m = self.dim
        eye = QMat.eye(m)
        if self.left[0] != eye or self.right[0] != eye:
            raise AlgebraError(
                f"{self.name}: basis vector 0 is not a two-sided unit")
        for i in range(m):
            for j in range(m):
                # associativity: left-multiplying by e_i e_j equals L_i L_j
                lhs = qmat_sum([self.left[k].scale(self.structure[i][j][k])
                                for k in range(m)])
                if self.left[i] @ self.left[j] != lhs:
                    raise AlgebraError(
                        f"{self.name}: product not associative at "
                        f"({self.basis_names[i]}, {self.basis_names[j]})")

    # -- products --------------------------------------------------------------

    def mult_vec(self, u: Sequence[Fraction], v: Sequence[Fraction]) -> list[Fraction]:
        m = self.dim
        out = [Fraction(0)] * m
        for i, ui in enumerate(u):
            if not ui:
                continue
            for j, vj in enumerate(v):
                if not vj:
                    continue
                coeff = ui * vj
                for k, c in enumerate(self.structure[i][j]):
                    if c:
                        out[k] += coeff * c
        return out

    def left_mult_matrix(self, u: Sequence[Fraction]) -> QMat:
        return qmat_sum([self.left[i].scale(ui) for i, ui in enumerate(u)])

    def right_mult_matrix(self, u: Sequence[Fraction]) -> QMat:
        return qmat_sum([self.right[i].scale(ui) for i, ui in enumerate(u)])

    # -- elements ---------------------------------------------------------------

    def element(self, coeffs: Sequence) -> "Element":
        if len(coeffs) != self.dim:
            raise AlgebraError("coefficient vector has wrong length")
        return Element(self, tuple(Fraction(v) for v in coeffs))

    def unit(self) -> "Element":
        return self.basis_element(0)

    def zero(self) -> "Element":
        return self.element([0] * self.dim)

    def basis_element(self, i: int) -> "Element":
        return self.element([Fraction(k == i) for k in range(self.dim)])

    def elements(self) -> list["Element"]:
        return [self.basis_element(i) for i in range(self.dim)]

    # -- invariants --------------------------------------------------------------

    def is_commutative(self) -> bool:
        return all(self.structure[i][j] == self.structure[j][i]
                   for i in range(self.dim) for j in range(i))

    def center(self) -> Subspace:
        """{x : xa = ax for all a}, as coefficient vectors."""
        rows = []
        for j in range(self.dim):
            diff = self.left[j] - self.right[j]
            rows.extend(diff.to_fraction_rows())
        return nullspace_sparse(
            self.dim,
            ({c: v for c, v in enumerate(r) if v} for r in rows))

    def opposite(self, name: Optional[str] = None) -> "Algebra":
        m = self.dim
        structure = [[self.structure[j][i] for j in range(m)] for i in range(m)]
        return Algebra(name or f"op({self.name})", self.basis_names, structure,
                       check=False)

    def regular_bimodule(self) -> "Bimodule":
        return Bimodule(self, self.dim, self.left, self.right,
                        name=self.name, check=False)

    def __repr__(self) -> str:
        return f"Algebra({self.name!r}, dim={self.dim})"


class Element:
    """Algebra element: coefficient tuple against the algebra basis."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: Algebra, coeffs: tuple[Fraction, ...]):
        self.algebra = algebra
        self.coeffs = coeffs

    def __add__(self, other: "Element") -> "Element":
        return Element(self.algebra, tuple(
            a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Element") -> "Element":
        return Element(self.algebra, tuple(
            a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "Element":
        return Element(self.algebra, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, Element):
            return Element(self.algebra, tuple(
                self.algebra.mult_vec(self.coeffs, other.coeffs)))
        return Element(self.algebra, tuple(a * Fraction(other) for a in self.coeffs))

    def __rmul__(self, other) -> "Element":
        return Element(self.algebra, tuple(Fraction(other) * a for a in self.coeffs))

    def __pow__(self, n: int) -> "Element":
        out = self.algebra.unit()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Element) and self.algebra is other.algebra
                and self.coeffs == other.coeffs)

    def __hash__(self) -> int:
        return hash((id(self.algebra), self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __repr__(self) -> str:
        parts = []
        for c, name in zip(self.coeffs, self.algebra.basis_names):
            if not c:
                continue
            if c == 1:
                parts.append(name)
            elif c == -1:
                parts.append(f"-{name}")
            else:
                parts.append(f"{c}*{name}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


class Bimodule:
    """A-bimodule: commuting left action (hom) and right action (anti-hom)."""

    def __init__(self, algebra: Algebra, dim: int, left: Sequence[QMat],
                 right: Sequence[QMat], name: str = "M", check: bool = True):
        self.algebra = algebra
        self.dim = dim
        self.left = list(left)
        self.right = list(right)
        self.name = name
        if check:
            self.validate()

    def validate(self) -> None:
        A, dM = self.algebra, self.dim
        m = A.dim
        eye = QMat.eye(dM)
        if len(self.left) != m or len(self.right) != m:
            raise AlgebraError(f"{self.name}: need one action matrix per basis vector")
        if any(M.shape != (dM, dM) for M in self.left + self.right):
            raise AlgebraError(f"{self.name}: action matrix shape mismatch")
        if self.left[0] != eye or self.right[0] != eye:
            raise AlgebraError(f"{self.name}: unit must act as identity")
        for i in range(m):
            for j in range(m):
                prod = [A.structure[i][j][k] for k in range(m)]
                # left action preserves products: (e_i e_j) . x = e_i . (e_j . x)
                if self.left[i] @ self.left[j] != qmat_sum(
                        [self.left[k].scale(prod[k]) for k in range(m)]):
                    raise AlgebraError(f"{self.name}: left action not multiplicative")
                # right action reverses them: x . (e_i e_j) = (x . e_i) . e_j
                if self.right[j] @ self.right[i] != qmat_sum(
                        [self.right[k].scale(prod[k]) for k in range(m)]):
                    raise AlgebraError(f"{self.name}: right action not anti-multiplicative")
                if self.left[i] @ self.right[j] != self.right[j] @ self.left[i]:
                    raise AlgebraError(f"{self.name}: left and right actions do not commute")

    def left_action(self, a: Sequence[Fraction]) -> QMat:
        return qmat_sum([self.left[i].scale(ai) for i, ai in enumerate(a)])

    def right_action(self, a: Sequence[Fraction]) -> QMat:
        return qmat_sum([self.right[i].scale(ai) for i, ai in enumerate(a)])

    def __repr__(self) -> str:
        return f"Bimodule({self.name!r}, dim={self.dim} over {self.algebra.name})"


class AlgebraHom:
    """Unit-preserving multiplicative linear map between algebras."""

    def __init__(self, source: Algebra, target: Algebra, matrix: QMat,
                 name: str = "f", check: bool = True):
        self.source = source
        self.target = target
        self.matrix = matrix
        self.name = name
        if check:
            self.validate()

    def validate(self) -> None:
        F = self.matrix
        if F.shape != (self.target.dim, self.source.dim):
            raise AlgebraError(f"{self.name}: matrix shape mismatch")
        unit_img = F.column_fractions(0)
        if unit_img != list(self.target.unit().coeffs):
            raise AlgebraError(f"{self.name}: does not preserve the unit")
        for i in range(self.source.dim):
            fi = F.column_fractions(i)
            for j in range(self.source.dim):
                fj = F.column_fractions(j)
                lhs = self.target.mult_vec(fi, fj)
                prod = self.source.structure[i][j]
                rhs = [sum((prod[k] * F.entry(t, k) for k in range(self.source.dim)),
                           Fraction(0)) for t in range(self.target.dim)]
                if lhs != rhs:
                    raise AlgebraError(
                        f"{self.name}: not multiplicative at basis pair ({i},{j})")

    def __call__(self, x: Element) -> Element:
        out = self.matrix @ QMat.column(x.coeffs)
        return self.target.element(out.column_fractions(0))

    def compose(self, other: "AlgebraHom") -> "AlgebraHom":
        if other.target is not self.source:
            raise AlgebraError("composition: domains do not match")
        return AlgebraHom(other.source, self.target, self.matrix @ other.matrix,
                          name=f"{self.name}o{other.name}", check=False)

    def is_isomorphism(self) -> bool:
        if self.source.dim != self.target.dim:
            return False
        try:
            qmat_inverse(self.matrix)
            return True
        except Exception:
            return False

    def __repr__(self) -> str:
        return f"AlgebraHom({self.source.name} -> {self.target.name})"


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def rebase_unit_first(name: str, basis_names: Sequence[str],
                      structure: Sequence[Sequence[Sequence]],
                      unit_coeffs: Sequence) -> Algebra:
    """Re-express an algebra so the (given) unit is basis vector 0.

    Keeps as many of the original basis vectors as possible: the new basis is
    the unit followed by the original basis vectors that remain independent,
    in order.  Basis names are preserved for the kept vectors.
    """
    m = len(basis_names)
    unit = [Fraction(v) for v in unit_coeffs]
    red = RowReducer(m)
    if not red.add_dense(unit):
        raise AlgebraError("unit vector is zero")
    cols = [unit]
    names = ["1"]
    for t in range(m):
        probe = [Fraction(i == t) for i in range(m)]
        if red.add_dense(probe):
            cols.append(probe)
            names.append(basis_names[t])
    if len(cols) != m:
        raise AlgebraError("could not extend unit to a basis")
    P = QMat.from_rows([[cols[j][i] for j in range(m)] for i in range(m)])
    Pinv = qmat_inverse(P)
    raw = Algebra(name, basis_names, structure, check=False)
    new_structure = []
    for i in range(m):
        row = []
        for j in range(m):
            prod = raw.mult_vec(P.column_fractions(i), P.column_fractions(j))
            row.append((Pinv @ QMat.column(prod)).column_fractions(0))
        new_structure.append(row)
    return Algebra(name, names, new_structure)


def matrix_algebra(n: int) -> Algebra:
    """Full n x n matrix algebra; basis = identity then E_ij minus one slot.

    The identity replaces E_nn, so the basis is 1, E11, E12, ..., with
    E_nn = 1 - E11 - ... recovered implicitly.
    """
    names = ["1"] + [f"E{i + 1}{j + 1}" for i in range(n) for j in range(n)
                     if not (i == n - 1 and j == n - 1)]
    m = n * n
    # structure in the full E_ij basis first
    def eidx(i, j):
        return i * n + j
    structure = [[[Fraction(0)] * m for _ in range(m)] for _ in range(m)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    if j == k:
                        structure[eidx(i, j)][eidx(k, l)][eidx(i, l)] = Fraction(1)
    unit = [Fraction(int(i == j)) for i in range(n) for j in range(n)]
    full_names = [f"E{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    alg = rebase_unit_first(f"matrix({n})", full_names, structure, unit)
    assert alg.basis_names == names
    return alg


def truncated_polynomial_algebra(n: int, var: str = "t") -> Algebra:
    """Q[t] / (t^n): basis 1, t, ..., t^(n-1)."""
    if n < 1:
        raise AlgebraError("truncation order must be >= 1")
    names = ["1"] + [var if p == 1 else f"{var}^{p}" for p in range(1, n)]
    structure = [[[Fraction(int(k == i + j)) for k in range(n)]
                  for j in range(n)] for i in range(n)]
    return Algebra(f"truncpoly({n})", names, structure)


def dual_numbers() -> Algebra:
    a = truncated_polynomial_algebra(2, var="eps")
    a.name = "dual"
    return a


def base_field() -> Algebra:
    a = truncated_polynomial_algebra(1)
    a.name = "k"
    return a


def product_algebra(a: Algebra, b: Algebra, name: Optional[str] = None) -> Algebra:
    """Direct product A x B, rebased so the unit (1,1) comes first."""
    m = a.dim + b.dim
    structure = [[[Fraction(0)] * m for _ in range(m)] for _ in range(m)]
    for i in range(a.dim):
        for j in range(a.dim):
            for k in range(a.dim):
                structure[i][j][k] = a.structure[i][j][k]
    for i in range(b.dim):
        for j in range(b.dim):
            for k in range(b.dim):
                structure[a.dim + i][a.dim + j][a.dim + k] = b.structure[i][j][k]
    names = [f"a.{s}" for s in a.basis_names] + [f"b.{s}" for s in b.basis_names]
    unit = [Fraction(int(i == 0 or i == a.dim)) for i in range(m)]
    return rebase_unit_first(name or f"product({a.name},{b.name})",
                             names, structure, unit)


def group_algebra(elements: Sequence[str], table: dict, name: Optional[str] = None) -> Algebra:
    """Group algebra QG from a multiplication table {(g,h): gh}.

    ``elements`` lists the group elements; the identity is whichever element
    e satisfies e*g = g for all g.  Raises if the table is not a group.
    """
    n = len(elements)
    idx = {g: i for i, g in enumerate(elements)}
    if len(idx) != n:
        raise AlgebraError("duplicate group element names")
    for g in elements:
        for h in elements:
            if (g, h) not in table:
                raise AlgebraError(f"group table missing product {g}*{h}")
            if table[(g, h)] not in idx:
                raise AlgebraError(f"group table value {table[(g, h)]!r} not an element")
    ident = [e for e in elements
             if all(table[(e, g)] == g and table[(g, e)] == g for g in elements)]
    if len(ident) != 1:
        raise AlgebraError("group table has no (unique) identity")
    # associativity + inverses
    for g in elements:
        for h in elements:
            for k in elements:
                if table[(table[(g, h)], k)] != table[(g, table[(h, k)])]:
                    raise AlgebraError("group table is not associative")
        if not any(table[(g, h)] == ident[0] for h in elements):
            raise AlgebraError(f"group element {g} has no inverse")
    order = [ident[0]] + [g for g in elements if g != ident[0]]
    pos = {g: i for i, g in enumerate(order)}
    structure = [[[Fraction(int(pos[table[(g, h)]] == k)) for k in range(n)]
                  for h in order] for g in order]
    return Algebra(name or "group_algebra", order, structure)


def semidirect_product(mod: Bimodule, name: Optional[str] = None) -> "SemidirectProduct":
    """Square-zero extension A (+) M with (a,m)(a',m') = (aa', a.m' + m.a')."""
    A, dM = mod.algebra, mod.dim
    m = A.dim
    n = m + dM
    structure = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
    for i in range(m):
        for j in range(m):
            for k in range(m):
                structure[i][j][k] = A.structure[i][j][k]
        for p in range(dM):
            li = mod.left[i]
            ri = mod.right[i]
            for r in range(dM):
                structure[i][m + p][m + r] = li.entry(r, p)
                structure[m + p][i][m + r] = ri.entry(r, p)
    names = list(A.basis_names) + [f"{mod.name}.{p}" for p in range(dM)]
    alg = Algebra(name or f"semidirect({A.name},{mod.name})", names, structure)
    return SemidirectProduct(alg, A, mod)


class SemidirectProduct:
    def __init__(self, algebra: Algebra, base: Algebra, module: Bimodule):
        self.algebra = algebra
        self.base = base
        self.module = module

    def embed(self, a: Sequence[Fraction], mvec: Sequence[Fraction]) -> Element:
        return self.algebra.element(list(a) + list(mvec))

    def project_base(self, x: Element) -> list[Fraction]:
        return list(x.coeffs[: self.base.dim])

    def project_module(self, x: Element) -> list[Fraction]:
        return list(x.coeffs[self.base.dim:])


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------


def derivation_space(mod: Bimodule) -> Subspace:
    """All linear D: A -> M with D(ab) = a.D(b) + D(a).b.

    Vectors live in Q^(m*dM): D[r, j] at index j*dM + r (column-major).
    """
    A, dM = mod.algebra, mod.dim
    m = A.dim

    def rows():
        for i in range(m):
            li = mod.left[i]
            for j in range(m):
                rj = mod.right[j]
                cij = A.structure[i][j]
                for r in range(dM):
                    row: dict[int, Fraction] = {}
                    for k in range(m):
                        if cij[k]:
                            row[k * dM + r] = row.get(k * dM + r, Fraction(0)) + cij[k]
                    for s in range(dM):
                        v = li.entry(r, s)
                        if v:
                            row[j * dM + s] = row.get(j * dM + s, Fraction(0)) - v
                        v = rj.entry(r, s)
                        if v:
                            row[i * dM + s] = row.get(i * dM + s, Fraction(0)) - v
                    yield {c: v for c, v in row.items() if v}

    return nullspace_sparse(m * dM, rows())


def derivation_matrix(mod: Bimodule, vec: Sequence[Fraction]) -> QMat:
    """Reshape a derivation-space vector into the dM x m matrix of D."""
    dM, m = mod.dim, mod.algebra.dim
    return QMat.from_rows([[vec[j * dM + r] for j in range(m)] for r in range(dM)])


def derivation_vector(mod: Bimodule, mat: QMat) -> list[Fraction]:
    dM, m = mod.dim, mod.algebra.dim
    return [mat.entry(r, j) for j in range(m) for r in range(dM)]


def is_derivation(mod: Bimodule, mat: QMat) -> bool:
    A = mod.algebra
    for i in range(A.dim):
        di = mat.col(i)
        for j in range(A.dim):
            dj = mat.col(j)
            dij = qmat_sum([mat.col(k).scale(A.structure[i][j][k])
                            for k in range(A.dim)])
            if dij != mod.left[i] @ dj + mod.right[j] @ di:
                return False
    return True


def inner_derivation(mod: Bimodule, mvec: Sequence[Fraction]) -> QMat:
    """D_m(a) = m.a - a.m for a fixed module element m."""
    A = mod.algebra
    cols = []
    for i in range(A.dim):
        v = (mod.right[i] - mod.left[i]) @ QMat.column(mvec)
        cols.append(v.column_fractions(0))
    return QMat.from_rows([[cols[j][r] for j in range(A.dim)]
                           for r in range(mod.dim)])


def derivation_to_hom(sd: SemidirectProduct, dmat: QMat) -> AlgebraHom:
    """a |-> (a, D(a)); an algebra map into A (+) M iff D is a derivation."""
    A = sd.base
    rows = QMat.eye(A.dim).to_fraction_rows() + dmat.to_fraction_rows()
    return AlgebraHom(A, sd.algebra, QMat.from_rows(rows), name="graph")


def hom_to_derivation(sd: SemidirectProduct, hom: AlgebraHom) -> QMat:
    """Inverse of derivation_to_hom for maps of the form a |-> (a, D(a))."""
    A = sd.base
    rows = hom.matrix.to_fraction_rows()
    top = rows[: A.dim]
    if QMat.from_rows(top) != QMat.eye(A.dim):
        raise AlgebraError("homomorphism is not a graph over the base algebra")
    return QMat.from_rows(rows[A.dim:])


# ---------------------------------------------------------------------------
# Tensor product over A
# ---------------------------------------------------------------------------


class TensorQuotient:
    """M (x)_A N: the tensor product over the algebra.

    Quotient of M (x) N (index p*dimN + q) by the middle-action relations
    m.a (x) n - m (x) a.n.  ``free`` lists the coordinates that survive as a
    basis of the quotient.
    """

    def __init__(self, right_mod: Bimodule, left_mod: Bimodule):
        if right_mod.algebra is not left_mod.algebra:
            raise AlgebraError("tensor over A needs modules over the same algebra")
        self.algebra = right_mod.algebra
        self.m_mod = right_mod
        self.n_mod = left_mod
        dm, dn = right_mod.dim, left_mod.dim
        self.ambient = dm * dn
        red = RowReducer(self.ambient)
        for i in range(1, self.algebra.dim):  # a = unit gives the zero relation
            ra = right_mod.right[i]
            la = left_mod.left[i]
            for p in range(dm):
                for q in range(dn):
                    row: dict[int, Fraction] = {}
                    for r in range(dm):
                        v = ra.entry(r, p)
                        if v:
                            row[r * dn + q] = row.get(r * dn + q, Fraction(0)) + v
                    for s in range(dn):
                        v = la.entry(s, q)
                        if v:
                            row[p * dn + s] = row.get(p * dn + s, Fraction(0)) - v
                    red.add({c: v for c, v in row.items() if v})
        self.relations = Subspace(self.ambient, red.basis(), red.pivots(),
                                  _canonical=True)
        self._reducer = red
        pivset = set(red.pivots())
        self.free = [t for t in range(self.ambient) if t not in pivset]
        self.dim = len(self.free)

    def project_vector(self, vec: Sequence[Fraction]) -> list[Fraction]:
        """Coordinates of the class of vec against the free-coordinate basis."""
        rep = self._reducer.reduce_dense(vec)
        return [rep[t] for t in self.free]

    def pure_tensor(self, mvec: Sequence[Fraction], nvec: Sequence[Fraction]) -> list[Fraction]:
        dn = self.n_mod.dim
        vec = [Fraction(0)] * self.ambient
        for p, a in enumerate(mvec):
            if not a:
                continue
            for q, b in enumerate(nvec):
                if b:
                    vec[p * dn + q] = a * b
        return self.project_vector(vec)

    def factor_map(self, mat: QMat) -> Optional[QMat]:
        """Induced matrix on the quotient of a map defined on M (x) N.

        Returns None when the map does not kill the relations (i.e. it is not
        middle-linear).
        """
        for row in self.relations.basis:
            img = mat @ QMat.column(row)
            if not img.is_zero():
                return None
        cols = [[mat.entry(r, t) for r in range(mat.shape[0])] for t in self.free]
        return QMat.from_rows([[cols[j][r] for j in range(self.dim)]
                               for r in range(mat.shape[0])])


def tensor_over_A(right_mod: Bimodule, left_mod: Bimodule) -> TensorQuotient:
    return TensorQuotient(right_mod, left_mod)
