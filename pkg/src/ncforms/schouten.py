"""Skew multilinear calculus: wedge, insertion, graded bracket, Poisson.

A multimap of arity k is a k-linear map on the algebra with values in the
algebra or in scalars, stored as the matrix of its values on all basis
tuples (flat index big-endian).  Skewness is validated on construction by
adjacent-argument swaps.

Wedge and insertion are computed over shuffles; because the inputs are
skew this equals the full permutation sums with their 1/k!l! and
1/(k+1)!(p-1)! normalizations, and that equality is itself checked in the
test suite.  The graded bracket of algebra-valued multimaps is
i_K L - (-1)^{kl} i_L K with k, l the arities shifted down by one; the
polyderivations (first-slot Leibniz maps) are closed under it, and a skew
biderivation with vanishing self-bracket is a Poisson structure.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import Algebra
from .linalg import QMat, format_scalar, nullspace_sparse, parse_scalar

MAX_ARITY = 6


class SchoutenError(ValueError):
    pass


def _flat(m: int, I: Sequence[int]) -> int:
    idx = 0
    for i in I:
        if not 0 <= i < m:
            raise SchoutenError("basis index out of range")
        idx = idx * m + i
    return idx


def _tuple_at(m: int, k: int, idx: int) -> tuple[int, ...]:
    I = []
    for _ in range(k):
        idx, r = divmod(idx, m)
        I.append(r)
    return tuple(reversed(I))


def _shuffle_sign(S: Sequence[int]) -> int:
    """Sign of the permutation that moves the sorted positions S up front."""
    total = sum(S) - sum(range(len(S)))
    return -1 if total % 2 else 1


class MultiMap:
    """Skew k-linear map A^k -> A (or -> scalars), by values on basis tuples."""

    def __init__(self, algebra: Algebra, arity: int, data: QMat,
                 scalar: bool = False, check: bool = True):
        if arity < 0:
            raise SchoutenError("multimap arity must be >= 0")
        if arity > MAX_ARITY:
            raise SchoutenError(f"multimap arity exceeds cap {MAX_ARITY}")
        self.algebra = algebra
        self.arity = arity
        self.scalar = scalar
        self.target_dim = 1 if scalar else algebra.dim
        if data.shape != (self.target_dim, algebra.dim ** arity):
            raise SchoutenError(
                f"multimap data must be {self.target_dim} x "
                f"{algebra.dim ** arity}, got {data.shape}")
        self.data = data
        if check and not is_skew(self):
            raise SchoutenError("multimap values are not skew-symmetric")

    @classmethod
    def zeros(cls, algebra: Algebra, arity: int,
              scalar: bool = False) -> "MultiMap":
        dim = 1 if scalar else algebra.dim
        return cls(algebra, arity, QMat.zeros(dim, algebra.dim ** arity),
                   scalar=scalar, check=False)

    def value(self, I: Sequence[int]) -> list[Fraction]:
        if len(I) != self.arity:
            raise SchoutenError("tuple length does not match arity")
        return self.data.column_fractions(_flat(self.algebra.dim, tuple(I)))

    def evaluate(self, *args: Sequence[Fraction]) -> list[Fraction]:
        if len(args) != self.arity:
            raise SchoutenError("argument count does not match arity")
        m = self.algebra.dim
        acc = [Fraction(0)] * self.target_dim
        for flat in range(self.data.shape[1]):
            I = _tuple_at(m, self.arity, flat)
            coeff = Fraction(1)
            for t, i in enumerate(I):
                coeff *= Fraction(args[t][i])
                if not coeff:
                    break
            if coeff:
                col = self.data.column_fractions(flat)
                for r in range(self.target_dim):
                    acc[r] += coeff * col[r]
        return acc

    def value_with_first(self, w: Sequence[Fraction],
                         rest: Sequence[int]) -> list[Fraction]:
        """Value on (w, e_rest) with w a coefficient vector."""
        acc = [Fraction(0)] * self.target_dim
        for q, wq in enumerate(w):
            if wq:
                col = self.value((q,) + tuple(rest))
                for r in range(self.target_dim):
                    acc[r] += wq * col[r]
        return acc

    def _check_compatible(self, other: "MultiMap") -> None:
        if (self.algebra is not other.algebra or self.arity != other.arity
                or self.scalar != other.scalar):
            raise SchoutenError("multimaps live on different spaces")

    def __add__(self, other: "MultiMap") -> "MultiMap":
        self._check_compatible(other)
        return MultiMap(self.algebra, self.arity, self.data + other.data,
                        scalar=self.scalar, check=False)

    def __sub__(self, other: "MultiMap") -> "MultiMap":
        self._check_compatible(other)
        return MultiMap(self.algebra, self.arity, self.data - other.data,
                        scalar=self.scalar, check=False)

    def __neg__(self) -> "MultiMap":
        return MultiMap(self.algebra, self.arity, -self.data,
                        scalar=self.scalar, check=False)

    def scale(self, c) -> "MultiMap":
        return MultiMap(self.algebra, self.arity, self.data.scale(c),
                        scalar=self.scalar, check=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiMap):
            return NotImplemented
        return (self.algebra is other.algebra and self.arity == other.arity
                and self.scalar == other.scalar and self.data == other.data)

    def __hash__(self):  # pragma: no cover - multimaps are not dict keys
        raise TypeError("MultiMap is not hashable")

    def is_zero(self) -> bool:
        return self.data.is_zero()

    def to_json(self) -> dict:
        return {"arity": self.arity, "scalar": self.scalar,
                "coords": [[format_scalar(self.data.entry(r, c))
                            for c in range(self.data.shape[1])]
                           for r in range(self.target_dim)]}

    def __repr__(self) -> str:
        kind = "scalar" if self.scalar else "algebra"
        return (f"MultiMap(arity={self.arity}, {kind}-valued over "
                f"{self.algebra.name})")


def multimap_from_json(algebra: Algebra, obj: dict) -> MultiMap:
    data = QMat.from_rows([[parse_scalar(v) for v in row]
                           for row in obj["coords"]])
    return MultiMap(algebra, int(obj["arity"]), data,
                    scalar=bool(obj.get("scalar", False)))


def is_skew(mm: MultiMap) -> bool:
    """Adjacent swaps negate the value on every basis tuple."""
    m = mm.algebra.dim
    for flat in range(mm.data.shape[1]):
        I = _tuple_at(m, mm.arity, flat)
        col = None
        for t in range(mm.arity - 1):
            swapped = I[:t] + (I[t + 1], I[t]) + I[t + 2:]
            if col is None:
                col = mm.data.column_fractions(flat)
            other = mm.data.column_fractions(_flat(m, swapped))
            if any(a + b for a, b in zip(col, other)):
                return False
    return True


def alternation(mm: MultiMap) -> MultiMap:
    """Skew-symmetrization (1/k!) sum of signed argument permutations."""
    m = mm.algebra.dim
    k = mm.arity
    norm = Fraction(1, math.factorial(k))
    cols = []
    for flat in range(mm.data.shape[1]):
        I = _tuple_at(m, k, flat)
        acc = [Fraction(0)] * mm.target_dim
        for perm in itertools.permutations(range(k)):
            sign = _perm_sign(perm)
            col = mm.value(tuple(I[p] for p in perm))
            for r in range(mm.target_dim):
                acc[r] += sign * col[r]
        cols.append([v * norm for v in acc])
    return MultiMap(mm.algebra, k, _cols_to_qmat(mm.target_dim, cols),
                    scalar=mm.scalar)


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def _cols_to_qmat(height: int, cols: Sequence[Sequence[Fraction]]) -> QMat:
    if not cols:
        return QMat.zeros(height, 0)
    return QMat.from_rows([[c[r] for c in cols] for r in range(height)])


# ---------------------------------------------------------------------------
# Wedge and insertion
# ---------------------------------------------------------------------------


def wedge(phi: MultiMap, psi: MultiMap) -> MultiMap:
    """Shuffle wedge; values multiply (scalars scale, algebra values use
    the product in the given order)."""
    if phi.algebra is not psi.algebra:
        raise SchoutenError("wedge needs multimaps over one algebra")
    A = phi.algebra
    m = A.dim
    k, l = phi.arity, psi.arity
    if k + l > MAX_ARITY:
        raise SchoutenError(f"wedge arity {k + l} exceeds cap {MAX_ARITY}")
    scalar_out = phi.scalar and psi.scalar
    dim_out = 1 if scalar_out else m
    cols = []
    for flat in range(m ** (k + l)):
        I = _tuple_at(m, k + l, flat)
        acc = [Fraction(0)] * dim_out
        for S in itertools.combinations(range(k + l), k):
            rest = [t for t in range(k + l) if t not in S]
            sign = _shuffle_sign(S)
            a = phi.value(tuple(I[t] for t in S))
            b = psi.value(tuple(I[t] for t in rest))
            if phi.scalar and psi.scalar:
                term = [a[0] * b[0]]
            elif phi.scalar:
                term = [a[0] * v for v in b]
            elif psi.scalar:
                term = [v * b[0] for v in a]
            else:
                term = A.mult_vec(a, b)
            for r in range(dim_out):
                acc[r] += sign * term[r]
        cols.append(acc)
    return MultiMap(A, k + l, _cols_to_qmat(dim_out, cols),
                    scalar=scalar_out, check=False)


def insertion(K: MultiMap, phi: MultiMap) -> MultiMap:
    """Insert an algebra-valued multimap into the first slot, shuffled over
    the remaining slots.  Inserting into an arity-0 map gives zero."""
    if K.scalar:
        raise SchoutenError("can only insert algebra-valued multimaps")
    if K.algebra is not phi.algebra:
        raise SchoutenError("insertion needs multimaps over one algebra")
    A = K.algebra
    m = A.dim
    kappa, p = K.arity, phi.arity
    if p == 0:
        if kappa == 0:
            raise SchoutenError("insertion of a constant into a constant")
        return MultiMap.zeros(A, kappa - 1, scalar=phi.scalar)
    n = kappa - 1 + p
    if n > MAX_ARITY:
        raise SchoutenError(f"insertion arity {n} exceeds cap {MAX_ARITY}")
    dim_out = phi.target_dim
    cols = []
    for flat in range(m ** n):
        I = _tuple_at(m, n, flat)
        acc = [Fraction(0)] * dim_out
        for S in itertools.combinations(range(n), kappa):
            rest = tuple(I[t] for t in range(n) if t not in S)
            sign = _shuffle_sign(S)
            w = K.value(tuple(I[t] for t in S))
            term = phi.value_with_first(w, rest)
            for r in range(dim_out):
                acc[r] += sign * term[r]
        cols.append(acc)
    return MultiMap(A, n, _cols_to_qmat(dim_out, cols),
                    scalar=phi.scalar, check=False)


def nr_bracket(K: MultiMap, L: MultiMap) -> MultiMap:
    """i_K L - (-1)^{kl} i_L K, with k, l the arities shifted down by one."""
    if K.scalar or L.scalar:
        raise SchoutenError("the bracket needs algebra-valued multimaps")
    if K.arity + L.arity < 1:
        raise SchoutenError("the bracket needs at least one arity >= 1")
    sign = -1 if ((K.arity - 1) * (L.arity - 1)) % 2 else 1
    return insertion(K, L) - insertion(L, K).scale(sign)


# ---------------------------------------------------------------------------
# Polyderivations and Poisson structures
# ---------------------------------------------------------------------------


def first_slot_leibniz(K: MultiMap) -> bool:
    """a |-> K(a, rest) is a derivation for every basis rest-tuple."""
    if K.scalar or K.arity < 1:
        raise SchoutenError("Leibniz test needs an algebra-valued arity >= 1")
    A = K.algebra
    m = A.dim
    for flat in range(m ** (K.arity - 1)):
        rest = _tuple_at(m, K.arity - 1, flat)
        vals = [K.value((i,) + rest) for i in range(m)]
        for i in range(m):
            ei = [Fraction(t == i) for t in range(m)]
            for j in range(m):
                prod = A.structure[i][j]
                got = [Fraction(0)] * m
                for q in range(m):
                    if prod[q]:
                        for r in range(m):
                            got[r] += prod[q] * vals[q][r]
                ej = [Fraction(t == j) for t in range(m)]
                want = [a + b for a, b in zip(A.mult_vec(ei, vals[j]),
                                              A.mult_vec(vals[i], ej))]
                if got != want:
                    return False
    return True


def is_polyderivation(K: MultiMap) -> bool:
    return is_skew(K) and first_slot_leibniz(K)


def schouten_closure_check(K1: MultiMap, K2: MultiMap) -> bool:
    """The bracket of two polyderivations is again one."""
    if not (is_polyderivation(K1) and is_polyderivation(K2)):
        raise SchoutenError("closure check needs polyderivation inputs")
    return is_polyderivation(nr_bracket(K1, K2))


def polyderivation_space(algebra: Algebra, arity: int) -> list[MultiMap]:
    """Basis of the skew multimaps of the given arity whose first slot is a
    derivation (hence, by skewness, every slot)."""
    if arity < 1:
        raise SchoutenError("polyderivations have arity >= 1")
    m = algebra.dim
    ncols = m ** arity * m  # unknown index: flat tuple * m + component

    def rows():
        for flat in range(m ** arity):
            I = _tuple_at(m, arity, flat)
            # adjacent swaps negate
            for t in range(arity - 1):
                swapped = I[:t] + (I[t + 1], I[t]) + I[t + 2:]
                sflat = _flat(m, swapped)
                if sflat < flat:
                    continue  # each unordered pair once
                for r in range(m):
                    row = {flat * m + r: Fraction(1)}
                    key = sflat * m + r
                    row[key] = row.get(key, Fraction(0)) + 1
                    yield row
        # first-slot Leibniz on basis pairs
        for flat in range(m ** (arity - 1)):
            rest = _tuple_at(m, arity - 1, flat)
            idx = [_flat(m, (q,) + rest) for q in range(m)]
            for i in range(m):
                for j in range(m):
                    prod = algebra.structure[i][j]
                    for r in range(m):
                        row: dict[int, Fraction] = {}

                        def bump(col: int, v: Fraction) -> None:
                            val = row.get(col, Fraction(0)) + v
                            if val:
                                row[col] = val
                            else:
                                row.pop(col, None)

                        for q in range(m):
                            if prod[q]:
                                bump(idx[q] * m + r, Fraction(prod[q]))
                        for s in range(m):
                            v = algebra.left[i].entry(r, s)
                            if v:
                                bump(idx[j] * m + s, -v)
                            v = algebra.right[j].entry(r, s)
                            if v:
                                bump(idx[i] * m + s, -v)
                        yield row

    out = []
    for vec in nullspace_sparse(ncols, rows()).basis:
        data = QMat.from_rows([[vec[c * m + r] for c in range(m ** arity)]
                               for r in range(m)])
        out.append(MultiMap(algebra, arity, data))
    return out


def commutator_bivector(algebra: Algebra) -> MultiMap:
    """mu(a, b) = ab - ba."""
    m = algebra.dim
    cols = []
    for flat in range(m * m):
        i, j = _tuple_at(m, 2, flat)
        cols.append([algebra.structure[i][j][r] - algebra.structure[j][i][r]
                     for r in range(m)])
    return MultiMap(algebra, 2, _cols_to_qmat(m, cols))


def poisson_check(mu: MultiMap) -> dict:
    """Three independent verdicts on a bilinear candidate."""
    if mu.scalar or mu.arity != 2:
        raise SchoutenError("a Poisson candidate is algebra-valued arity 2")
    A = mu.algebra
    m = A.dim
    skew = is_skew(mu)
    first = first_slot_leibniz(mu)
    second = True
    for i in range(m):
        ei = [Fraction(t == i) for t in range(m)]
        for j in range(m):
            ej = [Fraction(t == j) for t in range(m)]
            for l in range(m):
                prod = A.structure[j][l]
                got = [Fraction(0)] * m
                for q in range(m):
                    if prod[q]:
                        col = mu.value((i, q))
                        for r in range(m):
                            got[r] += prod[q] * col[r]
                el = [Fraction(t == l) for t in range(m)]
                want = [a + b for a, b in zip(
                    A.mult_vec(ej, mu.value((i, l))),
                    A.mult_vec(mu.value((i, j)), el))]
                if got != want:
                    second = False
    jacobi = nr_bracket(mu, mu).is_zero()
    return {"skew": skew, "biderivation": first and second,
            "jacobi": jacobi, "poisson": skew and first and second and jacobi}


def derivation_matrix_of(mu: MultiMap, a: Sequence[Fraction]) -> QMat:
    """The linear map b |-> mu(a, b) as a matrix."""
    m = mu.algebra.dim
    cols = [mu.value_with_first(a, (j,)) for j in range(m)]
    return _cols_to_qmat(m, cols)


def poisson_bracket_hom_check(mu: MultiMap) -> dict:
    """a |-> mu(a, .) lands in derivations and turns mu into commutators."""
    from .algebra import is_derivation
    A = mu.algebra
    m = A.dim
    M = A.regular_bimodule()
    mats = [derivation_matrix_of(mu, [Fraction(t == i) for t in range(m)])
            for i in range(m)]
    derivation_valued = all(is_derivation(M, D) for D in mats)
    lie_hom = True
    for i in range(m):
        for j in range(m):
            image = derivation_matrix_of(mu, mu.value((i, j)))
            if image != mats[i] @ mats[j] - mats[j] @ mats[i]:
                lie_hom = False
    return {"derivation_valued": derivation_valued,
            "lie_homomorphism": lie_hom,
            "all": derivation_valued and lie_hom}


def poisson_scan(algebra: Algebra, bound: int = 1,
                 cap: int = 100000) -> list[MultiMap]:
    """All nonzero integer combinations of the skew-biderivation basis with
    coefficients in [-bound, bound] that have vanishing self-bracket.

    The Leibniz and skew conditions are linear, so the lattice only ranges
    over the solution space of those; the quadratic self-bracket condition
    is then checked exactly.
    """
    basis = polyderivation_space(algebra, 2)
    count = (2 * bound + 1) ** len(basis)
    if count > cap:
        raise SchoutenError(
            f"lattice of {count} candidates exceeds cap {cap}")
    found = []
    for coeffs in itertools.product(range(-bound, bound + 1),
                                    repeat=len(basis)):
        if not any(coeffs):
            continue
        mu = MultiMap.zeros(algebra, 2)
        for c, b in zip(coeffs, basis):
            if c:
                mu = mu + b.scale(c)
        if nr_bracket(mu, mu).is_zero():
            found.append(mu)
    return found
