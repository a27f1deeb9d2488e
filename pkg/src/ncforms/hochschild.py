"""Hochschild cohomology of a unital algebra, computed two independent ways.

Normalized n-cochains are multilinear maps on Abar^n (Abar = the algebra
modulo its unit line) with values in a bimodule M.  A cochain is stored as a
matrix whose column at the flat index of (j_1..j_n) is the value on the basis
tuple (e_{j_1},..,e_{j_n}), with j_t in 1..m-1; normalization is structural,
mirroring the d-slot indexing of form bases.

Degree-n cocycles correspond to bimodule homomorphisms out of the degree-n
form space: the universal cocycle sends a basis tuple J to the basis form
(0; J), every bimodule homomorphism Phi yields the cocycle Phi composed with
it, and conversely a cocycle c extends left-linearly to the homomorphism
(i, J) |-> e_i . c(J).  Coboundaries are exactly the homomorphisms that
factor through the comparison homomorphism into the free bimodule
A (x) Abar^(n-1) (x) A.  Cohomology is computed both from this picture (hom
space modulo the image of composition with the comparison map) and directly
from the normalized complex; the two dimensions must agree.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .algebra import Algebra, Bimodule
from .forms import form_space
from .linalg import QMat, Subspace, nullspace_sparse, solve_linear


class HochschildError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Bar-tuple indexing: tuples (j_1..j_n), j in 1..m-1, flat index big-endian
# ---------------------------------------------------------------------------


def _bar_dim(m: int, n: int) -> int:
    return (m - 1) ** n


def _bar_flat(m: int, J: Sequence[int]) -> int:
    idx = 0
    for j in J:
        if not 1 <= j < m:
            raise HochschildError("bar-tuple index out of range")
        idx = idx * (m - 1) + (j - 1)
    return idx


def _bar_tuple(m: int, n: int, idx: int) -> tuple[int, ...]:
    J = []
    for _ in range(n):
        idx, r = divmod(idx, m - 1)
        J.append(r + 1)
    return tuple(reversed(J))


def _cols_to_qmat(height: int, cols: Sequence[Sequence[Fraction]]) -> QMat:
    if not cols:
        return QMat.zeros(height, 0)
    return QMat.from_rows([[c[r] for c in cols] for r in range(height)])


# ---------------------------------------------------------------------------
# Normalized cochains
# ---------------------------------------------------------------------------


class NormalizedCochain:
    """Multilinear map Abar^n -> M, as the matrix of values on basis tuples."""

    def __init__(self, module: Bimodule, arity: int, data: QMat):
        if arity < 0:
            raise HochschildError("cochain arity must be >= 0")
        m = module.algebra.dim
        if data.shape != (module.dim, _bar_dim(m, arity)):
            raise HochschildError(
                f"cochain data must be {module.dim} x {_bar_dim(m, arity)}, "
                f"got {data.shape}")
        self.module = module
        self.arity = arity
        self.data = data

    @classmethod
    def zeros(cls, module: Bimodule, arity: int) -> "NormalizedCochain":
        m = module.algebra.dim
        return cls(module, arity, QMat.zeros(module.dim, _bar_dim(m, arity)))

    @classmethod
    def from_vector(cls, module: Bimodule, arity: int,
                    vec: Sequence[Fraction]) -> "NormalizedCochain":
        m = module.algebra.dim
        nJ, dM = _bar_dim(m, arity), module.dim
        if len(vec) != nJ * dM:
            raise HochschildError("cochain vector length mismatch")
        return cls(module, arity, QMat.from_rows(
            [[vec[j * dM + r] for j in range(nJ)] for r in range(dM)]))

    def to_vector(self) -> list[Fraction]:
        nJ, dM = self.data.shape[1], self.module.dim
        return [self.data.entry(r, j) for j in range(nJ) for r in range(dM)]

    def value(self, J: Sequence[int]) -> QMat:
        """Value on the basis tuple J, as a column over the module basis."""
        if len(J) != self.arity:
            raise HochschildError("tuple length does not match arity")
        return self.data.col(_bar_flat(self.module.algebra.dim, tuple(J)))

    def evaluate(self, *args: Sequence[Fraction]) -> list[Fraction]:
        """Multilinear extension; unit components of the arguments drop out."""
        if len(args) != self.arity:
            raise HochschildError("argument count does not match arity")
        m = self.module.algebra.dim
        acc = QMat.zeros(self.module.dim, 1)
        for flat in range(self.data.shape[1]):
            J = _bar_tuple(m, self.arity, flat)
            coeff = Fraction(1)
            for t, j in enumerate(J):
                coeff *= Fraction(args[t][j])
                if not coeff:
                    break
            if coeff:
                acc = acc + self.data.col(flat).scale(coeff)
        return acc.column_fractions(0)

    def _check_compatible(self, other: "NormalizedCochain") -> None:
        if (self.module.algebra is not other.module.algebra
                or self.module.dim != other.module.dim
                or self.arity != other.arity):
            raise HochschildError("cochains live on different spaces")

    def __add__(self, other: "NormalizedCochain") -> "NormalizedCochain":
        self._check_compatible(other)
        return NormalizedCochain(self.module, self.arity, self.data + other.data)

    def __sub__(self, other: "NormalizedCochain") -> "NormalizedCochain":
        self._check_compatible(other)
        return NormalizedCochain(self.module, self.arity, self.data - other.data)

    def __neg__(self) -> "NormalizedCochain":
        return NormalizedCochain(self.module, self.arity, -self.data)

    def scale(self, c) -> "NormalizedCochain":
        return NormalizedCochain(self.module, self.arity, self.data.scale(c))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NormalizedCochain):
            return NotImplemented
        return (self.module.algebra is other.module.algebra
                and self.module.dim == other.module.dim
                and self.arity == other.arity and self.data == other.data)

    def __hash__(self):  # pragma: no cover - cochains are not dict keys
        raise TypeError("NormalizedCochain is not hashable")

    def is_zero(self) -> bool:
        return self.data.is_zero()

    def __repr__(self) -> str:
        return (f"NormalizedCochain(arity={self.arity}, "
                f"module={self.module.name!r})")


def cochain_dim(module: Bimodule, n: int) -> int:
    return _bar_dim(module.algebra.dim, n) * module.dim


# ---------------------------------------------------------------------------
# The coboundary operator
# ---------------------------------------------------------------------------


def coboundary(c: NormalizedCochain) -> NormalizedCochain:
    """(dc)(a_1..a_{n+1}) = a_1 c(a_2..) + sum (-1)^t c(.., a_t a_{t+1}, ..)
    + (-1)^{n+1} c(a_1..a_n) a_{n+1}; unit components of the merged products
    drop out because the cochain is normalized."""
    module = c.module
    A = module.algebra
    m, n, dM = A.dim, c.arity, module.dim
    cols = []
    for flat in range(_bar_dim(m, n + 1)):
        K = _bar_tuple(m, n + 1, flat)
        acc = module.left[K[0]] @ c.value(K[1:])
        for t in range(n):
            sign = -1 if (t + 1) % 2 else 1
            prod = A.structure[K[t]][K[t + 1]]
            for p in range(1, m):
                if prod[p]:
                    merged = K[:t] + (p,) + K[t + 2:]
                    acc = acc + c.value(merged).scale(sign * prod[p])
        sign = -1 if (n + 1) % 2 else 1
        acc = acc + (module.right[K[-1]] @ c.value(K[:-1])).scale(sign)
        cols.append(acc.column_fractions(0))
    return NormalizedCochain(module, n + 1, _cols_to_qmat(dM, cols))


def coboundary_rows(module: Bimodule, n: int):
    """Sparse rows of the degree-n coboundary matrix on cochain vectors.

    Row order: output coordinate (flat K) * dim M + r; column convention
    matches NormalizedCochain.to_vector.
    """
    A = module.algebra
    m, dM = A.dim, module.dim
    for flat in range(_bar_dim(m, n + 1)):
        K = _bar_tuple(m, n + 1, flat)
        head = _bar_flat(m, K[1:])
        tail = _bar_flat(m, K[:-1])
        merges = []
        for t in range(n):
            sign = -1 if (t + 1) % 2 else 1
            prod = A.structure[K[t]][K[t + 1]]
            for p in range(1, m):
                if prod[p]:
                    merges.append((_bar_flat(m, K[:t] + (p,) + K[t + 2:]),
                                   sign * prod[p]))
        last_sign = -1 if (n + 1) % 2 else 1
        left, right = module.left[K[0]], module.right[K[-1]]
        for r in range(dM):
            row: dict[int, Fraction] = {}

            def bump(col: int, v: Fraction) -> None:
                val = row.get(col, Fraction(0)) + v
                if val:
                    row[col] = val
                else:
                    row.pop(col, None)

            for s in range(dM):
                v = left.entry(r, s)
                if v:
                    bump(head * dM + s, v)
                v = right.entry(r, s)
                if v:
                    bump(tail * dM + s, last_sign * v)
            for merged, coeff in merges:
                bump(merged * dM + r, Fraction(coeff))
            yield row


def cocycle_space(module: Bimodule, n: int) -> Subspace:
    """Kernel of the degree-n coboundary, in cochain-vector coordinates."""
    return nullspace_sparse(cochain_dim(module, n), coboundary_rows(module, n))


def complex_dims(module: Bimodule, n: int) -> dict:
    """Cocycle, coboundary and cohomology dimensions from the complex itself."""
    z = cocycle_space(module, n).dim
    if n == 0:
        b = 0
    else:
        b = cochain_dim(module, n - 1) - cocycle_space(module, n - 1).dim
    return {"cocycles": z, "coboundaries": b, "cohomology": z - b}


# ---------------------------------------------------------------------------
# Cocycles <-> bimodule homomorphisms out of the form spaces
# ---------------------------------------------------------------------------


def universal_cocycle(algebra: Algebra, n: int) -> NormalizedCochain:
    """The cocycle J |-> basis form (0; J) with values in degree-n forms."""
    if n < 1:
        raise HochschildError("the universal cocycle needs arity >= 1")
    sp = form_space(algebra, n)
    module = sp.as_bimodule()
    nJ = _bar_dim(algebra.dim, n)
    cols = []
    for flat in range(nJ):
        col = [Fraction(0)] * sp.dim
        col[flat] = Fraction(1)  # index_of(0, J) == flat J, big-endian
        cols.append(col)
    return NormalizedCochain(module, n, _cols_to_qmat(sp.dim, cols))


def cochain_to_hom(c: NormalizedCochain) -> QMat:
    """Left-linear extension: column (i, J) is e_i . c(J).

    The result commutes with the left actions by construction; it commutes
    with the right actions exactly when c is a cocycle.
    """
    sp = form_space(c.module.algebra, c.arity)
    cols = []
    for idx in range(sp.dim):
        i, J = sp.tuple_of(idx)
        cols.append((c.module.left[i] @ c.value(J)).column_fractions(0))
    return _cols_to_qmat(c.module.dim, cols)


def hom_to_cochain(module: Bimodule, n: int, hom: QMat) -> NormalizedCochain:
    """Compose a map out of degree-n forms with the universal cocycle."""
    sp = form_space(module.algebra, n)
    if hom.shape != (module.dim, sp.dim):
        raise HochschildError("hom matrix shape mismatch")
    nJ = _bar_dim(module.algebra.dim, n)
    # the (0; J) block is the leading block of columns, in bar-tuple order
    data = QMat.from_rows([[hom.entry(r, j) for j in range(nJ)]
                           for r in range(module.dim)])
    return NormalizedCochain(module, n, data)


def bimodule_hom_violation(src: Bimodule, tgt: Bimodule,
                           hom: QMat) -> Optional[dict]:
    """First basis witness where hom fails to commute with an action."""
    if hom.shape != (tgt.dim, src.dim):
        raise HochschildError("hom matrix shape mismatch")
    for side, src_acts, tgt_acts in (("left", src.left, tgt.left),
                                     ("right", src.right, tgt.right)):
        for i in range(src.algebra.dim):
            lhs = hom @ src_acts[i]
            rhs = tgt_acts[i] @ hom
            if lhs != rhs:
                diff = lhs - rhs
                for j in range(src.dim):
                    if not diff.col(j).is_zero():
                        return {"side": side, "algebra_index": i,
                                "source_index": j}
    return None


def is_bimodule_hom(src: Bimodule, tgt: Bimodule, hom: QMat) -> bool:
    return bimodule_hom_violation(src, tgt, hom) is None


def form_hom_space(algebra: Algebra, n: int, module: Bimodule) -> Subspace:
    """Bimodule homomorphisms degree-n forms -> M, in generator coordinates.

    A left-module map is free on the generators (0; J); the right-module
    condition need only be imposed on those generators.  The coordinates of
    the result are exactly cochain vectors (the generator values), so this
    space can be compared verbatim with the cocycle space.
    """
    m = algebra.dim
    sp = form_space(algebra, n)
    dM = module.dim
    nJ = _bar_dim(m, n)

    def rows():
        for flat in range(nJ):
            gen = flat  # == sp.index_of(0, J)
            for p in range(1, m):
                moved = sp.right[p].col(gen).column_fractions(0)
                for r in range(dM):
                    row: dict[int, Fraction] = {}

                    def bump(col: int, v: Fraction) -> None:
                        val = row.get(col, Fraction(0)) + v
                        if val:
                            row[col] = val
                        else:
                            row.pop(col, None)

                    # value of the extension on (0; J) . e_p ...
                    for q, w in enumerate(moved):
                        if w:
                            i, Jq = sp.tuple_of(q)
                            flat_q = _bar_flat(m, Jq)
                            for s in range(dM):
                                v = module.left[i].entry(r, s)
                                if v:
                                    bump(flat_q * dM + s, w * v)
                    # ... must equal the value on (0; J) moved by e_p in M
                    for s in range(dM):
                        v = module.right[p].entry(r, s)
                        if v:
                            bump(flat * dM + s, -v)
                    yield row

    return nullspace_sparse(nJ * dM, rows())


def form_hom_matrices(algebra: Algebra, n: int, module: Bimodule) -> list[QMat]:
    return [cochain_to_hom(NormalizedCochain.from_vector(module, n, v))
            for v in form_hom_space(algebra, n, module).basis]


# ---------------------------------------------------------------------------
# The free bimodule A (x) Abar^(n-1) (x) A and the comparison homomorphism
# ---------------------------------------------------------------------------


class TensorBimodule(Bimodule):
    """A (x) Abar^(x)(n-1) (x) A with the outer-factor actions.

    Basis (i, J, l): i, l over the algebra basis, J a bar-tuple of length
    n-1; flat index big-endian in that order.
    """

    def __init__(self, algebra: Algebra, n: int):
        if n < 1:
            raise HochschildError("tensor bimodule needs n >= 1")
        m = algebra.dim
        self.n = n
        self.middles = n - 1
        mid = _bar_dim(m, n - 1)
        left = [L.kron(QMat.eye(mid * m)) for L in algebra.left]
        right = [QMat.eye(m * mid).kron(R) for R in algebra.right]
        super().__init__(algebra, m * mid * m, left, right,
                         name=f"free{n}({algebra.name})", check=False)

    def index_of(self, i: int, J: Sequence[int], l: int) -> int:
        m = self.algebra.dim
        if not (0 <= i < m and 0 <= l < m):
            raise HochschildError("outer index out of range")
        if len(J) != self.middles:
            raise HochschildError("middle tuple length mismatch")
        return (i * _bar_dim(m, self.middles) + _bar_flat(m, J)) * m + l

    def tuple_of(self, idx: int) -> tuple[int, tuple[int, ...], int]:
        m = self.algebra.dim
        idx, l = divmod(idx, m)
        i, flat = divmod(idx, _bar_dim(m, self.middles))
        return i, _bar_tuple(m, self.middles, flat), l


def tensor_module(algebra: Algebra, n: int) -> TensorBimodule:
    return TensorBimodule(algebra, n)


def tensor_hom_from_values(tensor: TensorBimodule, module: Bimodule,
                           values: QMat) -> QMat:
    """The bimodule homomorphism with the given values on (0; J; 0).

    The tensor bimodule is free on those generators: (i, J, l) maps to
    e_i . values(J) . e_l.  ``values`` has one column per middle tuple.
    """
    m = tensor.algebra.dim
    mid = _bar_dim(m, tensor.middles)
    if values.shape != (module.dim, mid):
        raise HochschildError("generator value matrix shape mismatch")
    cols = []
    for idx in range(tensor.dim):
        i, J, l = tensor.tuple_of(idx)
        col = module.left[i] @ module.right[l] @ values.col(_bar_flat(m, J))
        cols.append(col.column_fractions(0))
    return _cols_to_qmat(module.dim, cols)


def tensor_hom_basis(tensor: TensorBimodule, module: Bimodule) -> list[QMat]:
    """Basis of all bimodule homomorphisms out of the free bimodule."""
    m = tensor.algebra.dim
    mid = _bar_dim(m, tensor.middles)
    dM = module.dim
    out = []
    for flat in range(mid):
        for r in range(dM):
            values = [[Fraction(j == flat and s == r) for j in range(mid)]
                      for s in range(dM)]
            out.append(tensor_hom_from_values(tensor, module,
                                              QMat.from_rows(values)))
    return out


def unit_frame_cochain(algebra: Algebra, n: int) -> NormalizedCochain:
    """The (n-1)-cochain J |-> 1 (x) Jbar (x) 1 in the free bimodule."""
    tensor = tensor_module(algebra, n)
    m = algebra.dim
    mid = _bar_dim(m, n - 1)
    cols = []
    for flat in range(mid):
        col = [Fraction(0)] * tensor.dim
        col[tensor.index_of(0, _bar_tuple(m, n - 1, flat), 0)] = Fraction(1)
        cols.append(col)
    return NormalizedCochain(tensor, n - 1, _cols_to_qmat(tensor.dim, cols))


def comparison_cochain(algebra: Algebra, n: int) -> NormalizedCochain:
    """Coboundary of the unit-frame cochain: the cocycle represented by the
    comparison homomorphism."""
    return coboundary(unit_frame_cochain(algebra, n))


def universal_comparison_hom(algebra: Algebra, n: int) -> QMat:
    """The bimodule homomorphism degree-n forms -> A (x) Abar^(n-1) (x) A
    that represents the coboundary of the unit-frame cochain."""
    return cochain_to_hom(comparison_cochain(algebra, n))


def comparison_image(algebra: Algebra, n: int, module: Bimodule) -> Subspace:
    """Homs out of degree-n forms that factor through the comparison map,
    in the same generator coordinates as form_hom_space."""
    tensor = tensor_module(algebra, n)
    comp = universal_comparison_hom(algebra, n)
    gens = []
    for psi in tensor_hom_basis(tensor, module):
        gens.append(hom_to_cochain(module, n, psi @ comp).to_vector())
    return Subspace.from_generators(cochain_dim(module, n), gens)


def is_coboundary(algebra: Algebra, n: int, module: Bimodule,
                  hom: QMat) -> Optional[dict]:
    """Factor a bimodule homomorphism through the comparison map, if possible.

    Returns {"hom": Psi, "cochain": psi} with Psi composed with the
    comparison map equal to ``hom`` and psi the (n-1)-cochain of generator
    values, or None when no factorization exists (a nontrivial class).
    """
    if n < 1:
        raise HochschildError("factorization needs arity >= 1")
    sp = form_space(algebra, n)
    src = sp.as_bimodule()
    witness = bimodule_hom_violation(src, module, hom)
    if witness is not None:
        raise HochschildError(f"not a bimodule homomorphism: {witness}")
    tensor = tensor_module(algebra, n)
    comp = universal_comparison_hom(algebra, n)
    basis = tensor_hom_basis(tensor, module)
    target = hom_to_cochain(module, n, hom).to_vector()
    ncols = len(basis)
    if not target:
        sol: Optional[list[Fraction]] = [Fraction(0)] * ncols
    else:
        cols = [hom_to_cochain(module, n, psi @ comp).to_vector()
                for psi in basis]
        rows = [[cols[k][e] for k in range(ncols)] for e in range(len(target))]
        sol = solve_linear(rows, target)
    if sol is None:
        return None
    m = algebra.dim
    mid = _bar_dim(m, n - 1)
    dM = module.dim
    # unknowns were ordered middle-tuple major, module coordinate minor
    values = QMat.from_rows([[sol[j * dM + r] for j in range(mid)]
                             for r in range(dM)])
    psi_hom = tensor_hom_from_values(tensor, module, values)
    if psi_hom @ comp != hom:
        raise HochschildError("factorization check failed")  # pragma: no cover
    return {"hom": psi_hom,
            "cochain": NormalizedCochain(module, n - 1, values)}


# ---------------------------------------------------------------------------
# Cohomology, two routes
# ---------------------------------------------------------------------------


def cohomology_report(algebra: Algebra, module: Bimodule, n: int) -> dict:
    """Both computations of dim H^n(A, M) side by side.

    Route one: bimodule homomorphisms out of degree-n forms modulo those
    factoring through the comparison map.  Route two: the normalized
    complex.  ``agree`` is the whole point.
    """
    if n < 0:
        raise HochschildError("cohomology degree must be >= 0")
    homs = form_hom_space(algebra, n, module)
    if n == 0:
        dim_istar = 0
    else:
        image = comparison_image(algebra, n, module)
        if not image.is_subspace_of(homs):
            raise HochschildError(
                "comparison image escaped the hom space")  # pragma: no cover
        dim_istar = image.dim
    direct = complex_dims(module, n)
    forms_dim = homs.dim - dim_istar
    return {
        "n": n,
        "dim_hom": homs.dim,
        "dim_image_Istar": dim_istar,
        "dim_Hn_forms": forms_dim,
        "dim_Hn_complex": direct["cohomology"],
        "agree": forms_dim == direct["cohomology"],
    }
