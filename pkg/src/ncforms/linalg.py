"""Exact rational linear algebra.

Everything in this package reduces to linear algebra over the rationals.
Two representations are used:

* ``Fraction`` rows / :class:`Subspace` — the contract-level view.  A
  subspace is stored as its reduced row echelon basis (pivots ascending,
  pivot entries 1, pivot columns cleared), which is unique, so subspace
  equality is tuple equality.
* :class:`QMat` — a dense matrix as an integer numpy array plus one positive
  denominator.  Integer matrix products run at C speed; the array dtype is
  promoted from int64 to Python objects before any operation whose result
  could exceed 2**62, so results are always exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

Scalar = Fraction

_INT64_SAFE = 2 ** 62


class LinAlgError(ValueError):
    pass


def make_scalar(p: int, q: int = 1) -> Fraction:
    """Exact rational p/q.  Rejects q = 0 with a domain error."""
    if q == 0:
        raise LinAlgError("scalar denominator must be nonzero")
    return Fraction(p, q)


def parse_scalar(text: str) -> Fraction:
    """Parse 'p' or 'p/q' (ASCII decimal integers, optional sign)."""
    s = text.strip()
    if "/" in s:
        p_str, _, q_str = s.partition("/")
        try:
            p, q = int(p_str), int(q_str)
        except ValueError:
            raise LinAlgError(f"malformed rational literal {text!r}") from None
        return make_scalar(p, q)
    try:
        return Fraction(int(s))
    except ValueError:
        raise LinAlgError(f"malformed rational literal {text!r}") from None


def format_scalar(x: Fraction) -> str:
    """Inverse of parse_scalar: '3', '-1/2', ..."""
    return str(Fraction(x))


# ---------------------------------------------------------------------------
# Fraction-level row reduction
# ---------------------------------------------------------------------------


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form.  Returns (nonzero rows, pivot columns).

    Dense textbook Gauss-Jordan over Fraction; fine for the small systems
    this is called on directly.  Large/sparse systems go through
    :class:`RowReducer` instead.
    """
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    pr = 0
    for pc in range(ncols):
        piv = None
        for r in range(pr, len(m)):
            if m[r][pc] != 0:
                piv = r
                break
        if piv is None:
            continue
        m[pr], m[piv] = m[piv], m[pr]
        inv = 1 / m[pr][pc]
        m[pr] = [v * inv for v in m[pr]]
        for r in range(len(m)):
            if r != pr and m[r][pc] != 0:
                f = m[r][pc]
                m[r] = [a - f * b for a, b in zip(m[r], m[pr])]
        pivots.append(pc)
        pr += 1
        if pr == len(m):
            break
    return m[:pr], pivots


class RowReducer:
    """Incremental sparse RREF accumulator.

    Rows are dicts {column: Fraction}.  The stored rows always form a
    reduced echelon basis (monic pivots, pivot columns cleared in all other
    rows), so ``basis()`` is canonical.
    """

    def __init__(self, ambient: int):
        self.ambient = ambient
        self.rows: dict[int, dict[int, Fraction]] = {}

    def _reduce(self, row: dict[int, Fraction]) -> dict[int, Fraction]:
        # Eliminate every pivot coordinate (not just leading ones), so the
        # result is the canonical coset representative: supported on free
        # columns only.  Stored rows touch only their own pivot plus free
        # columns, so each subtraction below removes one pivot coordinate
        # and introduces none.
        row = {c: v for c, v in row.items() if v != 0}
        while True:
            hit = min((c for c in row if c in self.rows), default=None)
            if hit is None:
                return row
            f = row[hit]
            for cc, vv in self.rows[hit].items():
                nv = row.get(cc, Fraction(0)) - f * vv
                if nv:
                    row[cc] = nv
                else:
                    row.pop(cc, None)

    def add(self, row: dict[int, Fraction]) -> bool:
        """Insert a row; returns True if it enlarged the span."""
        row = self._reduce(row)
        if not row:
            return False
        c = min(row)
        inv = 1 / row[c]
        row = {cc: vv * inv for cc, vv in row.items()}
        # clear the new pivot column from existing rows
        for pc, prow in self.rows.items():
            f = prow.get(c)
            if f:
                for cc, vv in row.items():
                    nv = prow.get(cc, Fraction(0)) - f * vv
                    if nv:
                        prow[cc] = nv
                    else:
                        prow.pop(cc, None)
        self.rows[c] = row
        return True

    def add_dense(self, row: Iterable) -> bool:
        return self.add({i: Fraction(v) for i, v in enumerate(row) if v})

    def contains(self, row: Iterable) -> bool:
        return not self._reduce({i: Fraction(v) for i, v in enumerate(row) if v})

    def reduce_dense(self, row: Iterable) -> list[Fraction]:
        red = self._reduce({i: Fraction(v) for i, v in enumerate(row) if v})
        out = [Fraction(0)] * self.ambient
        for c, v in red.items():
            out[c] = v
        return out

    @property
    def dim(self) -> int:
        return len(self.rows)

    def basis(self) -> list[list[Fraction]]:
        out = []
        for c in sorted(self.rows):
            dense = [Fraction(0)] * self.ambient
            for cc, vv in self.rows[c].items():
                dense[cc] = vv
            out.append(dense)
        return out

    def pivots(self) -> list[int]:
        return sorted(self.rows)


class Subspace:
    """A linear subspace of Q^n in canonical (RREF basis) form."""

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, basis: Sequence[Sequence[Fraction]],
                 pivots: Sequence[int], _canonical: bool = False):
        if not _canonical:
            red = RowReducer(ambient)
            for row in basis:
                red.add_dense(row)
            basis, pivots = red.basis(), red.pivots()
        self.ambient = ambient
        self.basis = tuple(tuple(r) for r in basis)
        self.pivots = tuple(pivots)

    @classmethod
    def from_generators(cls, ambient: int, gens: Iterable[Sequence]) -> "Subspace":
        red = RowReducer(ambient)
        for g in gens:
            red.add_dense(g)
        return cls(ambient, red.basis(), red.pivots(), _canonical=True)

    @classmethod
    def zero(cls, ambient: int) -> "Subspace":
        return cls(ambient, [], [], _canonical=True)

    @classmethod
    def full(cls, ambient: int) -> "Subspace":
        eye = [[Fraction(i == j) for j in range(ambient)] for i in range(ambient)]
        return cls(ambient, eye, list(range(ambient)), _canonical=True)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, vec: Sequence) -> bool:
        red = self._reducer()
        return red.contains(vec)

    def _reducer(self) -> RowReducer:
        red = RowReducer(self.ambient)
        red.rows = {p: {c: v for c, v in enumerate(row) if v}
                    for p, row in zip(self.pivots, self.basis)}
        return red

    def is_subspace_of(self, other: "Subspace") -> bool:
        red = other._reducer()
        return all(red.contains(row) for row in self.basis)

    def add(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise LinAlgError("subspace sum: ambient dimensions differ")
        red = self._reducer()
        for row in other.basis:
            red.add_dense(row)
        return Subspace(self.ambient, red.basis(), red.pivots(), _canonical=True)

    __add__ = add

    def intersect(self, other: "Subspace") -> "Subspace":
        """Zassenhaus-free intersection: x in both row spaces."""
        if self.ambient != other.ambient:
            raise LinAlgError("subspace intersection: ambient dimensions differ")
        if not self.basis or not other.basis:
            return Subspace.zero(self.ambient)
        # solve alpha^T * self.basis = beta^T * other.basis
        k1, k2 = self.dim, other.dim
        rows = []
        for col in range(self.ambient):
            row = [self.basis[i][col] for i in range(k1)]
            row += [-other.basis[j][col] for j in range(k2)]
            rows.append(row)
        ns = nullspace(rows)
        gens = []
        for sol in ns.basis:
            vec = [Fraction(0)] * self.ambient
            for i in range(k1):
                if sol[i]:
                    for c in range(self.ambient):
                        vec[c] += sol[i] * self.basis[i][c]
            gens.append(vec)
        return Subspace.from_generators(self.ambient, gens)

    def quotient_dim(self, sub: "Subspace") -> int:
        if not sub.is_subspace_of(self):
            raise LinAlgError("quotient: not a subspace")
        return self.dim - sub.dim

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Subspace) and self.ambient == other.ambient
                and self.basis == other.basis)

    def __hash__(self) -> int:
        return hash((self.ambient, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


def rank(rows: Sequence[Sequence]) -> int:
    red = RowReducer(len(rows[0]) if rows else 0)
    for r in rows:
        red.add_dense(r)
    return red.dim


def nullspace(rows: Sequence[Sequence]) -> Subspace:
    """Kernel {x : A x = 0} of the matrix with the given rows."""
    if not rows:
        raise LinAlgError("nullspace of empty matrix is ambiguous; pass ncols rows")
    ncols = len(rows[0])
    rr, pivots = rref(rows)
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    gens = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for r, p in zip(rr, pivots):
            vec[p] = -r[f]
        gens.append(vec)
    return Subspace.from_generators(ncols, gens)


def nullspace_sparse(ncols: int, eq_rows: Iterable[dict[int, Fraction]]) -> Subspace:
    """Kernel of a system given as sparse rows {col: coeff}."""
    red = RowReducer(ncols)
    for r in eq_rows:
        red.add(dict(r))
    pivset = set(red.pivots())
    free = [c for c in range(ncols) if c not in pivset]
    gens = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for p in red.pivots():
            v = red.rows[p].get(f)
            if v:
                vec[p] = -v
        gens.append(vec)
    return Subspace.from_generators(ncols, gens)


def solve_linear(rows: Sequence[Sequence], rhs: Sequence) -> Optional[list[Fraction]]:
    """One solution of A x = b, or None if inconsistent."""
    ncols = len(rows[0])
    aug = [list(map(Fraction, r)) + [Fraction(v)] for r, v in zip(rows, rhs)]
    rr, pivots = rref(aug)
    for r, p in zip(rr, pivots):
        if p == ncols:
            return None
    sol = [Fraction(0)] * ncols
    for r, p in zip(rr, pivots):
        sol[p] = r[ncols]
    return sol


# ---------------------------------------------------------------------------
# QMat: integer numpy array + denominator
# ---------------------------------------------------------------------------


def _as_object(a: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        return a
    return a.astype(object)


def _max_abs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max((abs(int(v)) for v in a.flat), default=0)
    return int(np.max(np.abs(a)))


class QMat:
    """Exact rational matrix: integer array `num` / positive int `den`."""

    __slots__ = ("num", "den")

    def __init__(self, num: np.ndarray, den: int = 1):
        if den == 0:
            raise LinAlgError("QMat denominator must be nonzero")
        if den < 0:
            num, den = -num, -den
        self.num = num
        self.den = den

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMat":
        return cls(np.zeros((nrows, ncols), dtype=np.int64))

    @classmethod
    def eye(cls, n: int) -> "QMat":
        return cls(np.eye(n, dtype=np.int64))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "QMat":
        fr = [[Fraction(v) for v in r] for r in rows]
        den = 1
        for r in fr:
            for v in r:
                den = den * v.denominator // math.gcd(den, v.denominator)
        ints = [[int(v * den) for v in r] for r in fr]
        big = max((abs(v) for r in ints for v in r), default=0)
        dtype = object if big >= _INT64_SAFE else np.int64
        arr = np.array(ints, dtype=dtype)
        if arr.ndim == 1:  # empty rows edge case
            arr = arr.reshape(len(ints), 0)
        return cls(arr, den)

    @classmethod
    def column(cls, values: Sequence) -> "QMat":
        return cls.from_rows([[v] for v in values])

    # -- bookkeeping --------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.num.shape  # type: ignore[return-value]

    def reduced(self) -> "QMat":
        """Divide out gcd(all entries, den)."""
        if self.den == 1:
            return self
        g = self.den
        for v in self.num.flat:
            g = math.gcd(g, int(v))
            if g == 1:
                return self
        if g <= 1:
            return self
        if self.num.dtype == object:
            num = np.array([[int(v) // g for v in row] for row in self.num], dtype=object)
            if num.ndim == 1:
                num = num.reshape(self.num.shape)
        else:
            num = self.num // g
        return QMat(num, self.den // g)

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.num[i, j]), self.den)

    def to_fraction_rows(self) -> list[list[Fraction]]:
        d = self.den
        return [[Fraction(int(v), d) for v in row] for row in self.num]

    def column_fractions(self, j: int) -> list[Fraction]:
        d = self.den
        return [Fraction(int(v), d) for v in self.num[:, j]]

    def is_zero(self) -> bool:
        if self.num.dtype == object:
            return all(int(v) == 0 for v in self.num.flat)
        return not self.num.any()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QMat):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return (self - other).is_zero()

    def __hash__(self):  # pragma: no cover - QMats are not dict keys
        raise TypeError("QMat is unhashable")

    # -- arithmetic ----------------------------------------------------------

    def _aligned(self, other: "QMat") -> tuple[np.ndarray, np.ndarray, int]:
        l = self.den * other.den // math.gcd(self.den, other.den)
        fa, fb = l // self.den, l // other.den
        a, b = self.num, other.num
        if a.dtype != object and b.dtype != object:
            bound = max(_max_abs(a) * fa, _max_abs(b) * fb)
            if bound * 2 >= _INT64_SAFE:
                a, b = _as_object(a), _as_object(b)
        elif a.dtype == object or b.dtype == object:
            a, b = _as_object(a), _as_object(b)
        return a * fa, b * fb, l

    def __add__(self, other: "QMat") -> "QMat":
        a, b, l = self._aligned(other)
        return QMat(a + b, l)

    def __sub__(self, other: "QMat") -> "QMat":
        a, b, l = self._aligned(other)
        return QMat(a - b, l)

    def __neg__(self) -> "QMat":
        return QMat(-self.num, self.den)

    def scale(self, c) -> "QMat":
        c = Fraction(c)
        num, den = self.num, self.den * c.denominator
        if num.dtype != object:
            if _max_abs(num) * abs(c.numerator) >= _INT64_SAFE:
                num = _as_object(num)
        return QMat(num * c.numerator, den)

    def __matmul__(self, other: "QMat") -> "QMat":
        a, b = self.num, other.num
        if a.dtype != object and b.dtype != object:
            bound = a.shape[1] * _max_abs(a) * _max_abs(b)
            if bound >= _INT64_SAFE:
                a, b = _as_object(a), _as_object(b)
        elif a.dtype == object or b.dtype == object:
            a, b = _as_object(a), _as_object(b)
        return QMat(np.dot(a, b), self.den * other.den)

    def kron(self, other: "QMat") -> "QMat":
        a, b = self.num, other.num
        if a.dtype != object and b.dtype != object:
            if _max_abs(a) * _max_abs(b) >= _INT64_SAFE:
                a, b = _as_object(a), _as_object(b)
        elif a.dtype == object or b.dtype == object:
            a, b = _as_object(a), _as_object(b)
        return QMat(np.kron(a, b), self.den * other.den)

    @property
    def T(self) -> "QMat":
        return QMat(self.num.T.copy(), self.den)

    def col(self, j: int) -> "QMat":
        return QMat(self.num[:, j:j + 1].copy(), self.den)

    def hstack(self, other: "QMat") -> "QMat":
        a, b, l = self._aligned(other)
        return QMat(np.hstack([a, b]), l)

    def __repr__(self) -> str:
        return f"QMat({self.shape[0]}x{self.shape[1]}, den={self.den})"


def qmat_inverse(mat: QMat) -> QMat:
    """Inverse of a square QMat; raises LinAlgError if singular."""
    n = mat.shape[0]
    if mat.shape[1] != n:
        raise LinAlgError("inverse of non-square matrix")
    aug = [row + [Fraction(i == j) for j in range(n)]
           for i, row in enumerate(mat.to_fraction_rows())]
    rr, pivots = rref(aug)
    if list(pivots) != list(range(n)):
        raise LinAlgError("matrix is singular")
    return QMat.from_rows([row[n:] for row in rr])


def qmat_sum(mats: Sequence[QMat]) -> QMat:
    acc = mats[0]
    for m in mats[1:]:
        acc = acc + m
    return acc


def subspace_from_columns(mat: QMat) -> Subspace:
    """Column space of a QMat as a canonical Subspace."""
    red = RowReducer(mat.shape[0])
    den = mat.den
    for j in range(mat.shape[1]):
        red.add({i: Fraction(int(v), den) for i, v in enumerate(mat.num[:, j]) if v})
    return Subspace(mat.shape[0], red.basis(), red.pivots(), _canonical=True)
