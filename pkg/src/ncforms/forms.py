"""Differential forms over an algebra, in the concrete model A (x) Abar^k.

Degree-k forms have basis e_i . d(e_{j1}) ... d(e_{jk}) indexed by tuples
(i, j_1..j_k) with i in 0..m-1 and j_t in 1..m-1 (the unit has index 0 and
d(1) = 0, so unit indices never appear in d-slots).  The flat index is
big-endian: i is the most significant digit, the j's follow in base (m-1).

This makes the differential an index relabeling, the left action a Kronecker
product, and the product of forms a sum of outer products — everything stays
in integer matrix arithmetic.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Optional, Sequence

from .algebra import Algebra, AlgebraHom, Bimodule
from .linalg import QMat, RowReducer, Subspace, qmat_sum


class FormError(ValueError):
    pass


_cache_lock = threading.Lock()
_space_cache: dict[tuple[int, int], "FormSpace"] = {}


def form_space(algebra: Algebra, degree: int) -> "FormSpace":
    """The degree-k form space, built at most once per (algebra, degree)."""
    if degree < 0:
        raise FormError("form degree must be >= 0")
    key = (id(algebra), degree)
    with _cache_lock:
        sp = _space_cache.get(key)
        if sp is None:
            sp = FormSpace(algebra, degree)
            _space_cache[key] = sp
        return sp


class FormSpace:
    """All degree-k forms over one algebra; immutable once constructed."""

    def __init__(self, algebra: Algebra, degree: int):
        self.algebra = algebra
        self.degree = degree
        m = algebra.dim
        self.dim = m * (m - 1) ** degree
        self._tail = (m - 1) ** degree
        self._dmat: Optional[QMat] = None
        # right action of each basis element, built from the merge formula
        self.right = [self._right_action_matrix(b) for b in range(m)]
        # left action of e_i multiplies the leading coefficient only
        if degree == 0:
            self.left = list(algebra.left)
        else:
            tail_eye = QMat.eye(self._tail)
            self.left = [L.kron(tail_eye) for L in algebra.left]

    # -- indexing ------------------------------------------------------------

    def index_of(self, i: int, J: Sequence[int]) -> int:
        m = self.algebra.dim
        idx = i
        for j in J:
            if not 1 <= j < m:
                raise FormError("d-slot index out of range")
            idx = idx * (m - 1) + (j - 1)
        return idx

    def tuple_of(self, idx: int) -> tuple[int, tuple[int, ...]]:
        m = self.algebra.dim
        J = []
        for _ in range(self.degree):
            idx, r = divmod(idx, m - 1)
            J.append(r + 1)
        return idx, tuple(reversed(J))

    # -- differential ----------------------------------------------------------

    def d_index(self, idx: int) -> int:
        """Image basis index of d on basis vector idx, or -1 for zero."""
        i, J = self.tuple_of(idx)
        if i == 0:
            return -1
        m = self.algebra.dim
        out = 0
        for j in (i,) + J:
            out = out * (m - 1) + (j - 1)
        return out

    def d_matrix(self) -> QMat:
        """d: degree k -> k+1 as a matrix (memoized; the value is immutable)."""
        if self._dmat is None:
            import numpy as np
            target = form_space(self.algebra, self.degree + 1)
            mat = np.zeros((target.dim, self.dim), dtype=np.int64)
            for idx in range(self.dim):
                t = self.d_index(idx)
                if t >= 0:
                    mat[t, idx] = 1
            self._dmat = QMat(mat)
        return self._dmat

    # -- actions ---------------------------------------------------------------

    def _right_action_matrix(self, b: int) -> QMat:
        """omega . e_b by merging b into the word and contracting once.

        (a0 da1...dan).b = sum_{t=1..n} (-1)^{n-t} a0 da1...d(a_t a_{t+1})...da_{n+1}
                           + (-1)^n (a0 a1) da2...da_{n+1},   a_{n+1} = b,
        where each merged slot d(e_p e_q) expands through the structure
        constants and unit components vanish under d.
        """
        A = self.algebra
        m = A.dim
        n = self.degree
        if n == 0:
            return A.right[b]
        cols: list[dict[int, Fraction]] = [dict() for _ in range(self.dim)]

        def put(col: dict, i: int, J: Sequence[int], coeff: Fraction):
            if coeff:
                idx = self.index_of(i, J)
                col[idx] = col.get(idx, Fraction(0)) + coeff

        for idx in range(self.dim):
            i0, J = self.tuple_of(idx)
            word = list(J) + [b]  # a_1 .. a_{n+1}
            col = cols[idx]
            for t in range(1, n + 1):
                sign = Fraction((-1) ** (n - t))
                merged = A.structure[word[t - 1]][word[t]]
                rest = word[:t - 1] + [None] + word[t + 1:]
                for k in range(1, m):  # unit component k = 0 dies under d
                    if merged[k]:
                        slots = rest.copy()
                        slots[t - 1] = k
                        if all(s >= 1 for s in slots):
                            put(col, i0, slots, sign * merged[k])
            # last term: leading coefficients multiply
            lead = A.structure[i0][word[0]]
            tailslots = word[1:]
            if all(s >= 1 for s in tailslots):
                sign = Fraction((-1) ** n)
                for k in range(m):
                    if lead[k]:
                        put(col, k, tailslots, sign * lead[k])
        rows = [[cols[j].get(r, Fraction(0)) for j in range(self.dim)]
                for r in range(self.dim)]
        return QMat.from_rows(rows)

    def left_action(self, a: Sequence[Fraction]) -> QMat:
        return qmat_sum([self.left[i].scale(v) for i, v in enumerate(a)])

    def right_action(self, b: Sequence[Fraction]) -> QMat:
        return qmat_sum([self.right[i].scale(v) for i, v in enumerate(b)])

    def as_bimodule(self) -> Bimodule:
        return Bimodule(self.algebra, self.dim, self.left, self.right,
                        name=f"Omega{self.degree}", check=False)

    # -- elements ---------------------------------------------------------------

    def form(self, coords: Sequence) -> "Form":
        if len(coords) != self.dim:
            raise FormError("coordinate length does not match space dimension")
        return Form(self, QMat.column(coords))

    def form_from_qmat(self, vec: QMat) -> "Form":
        if vec.shape != (self.dim, 1):
            raise FormError("coordinate length does not match space dimension")
        return Form(self, vec)

    def zero(self) -> "Form":
        return Form(self, QMat.zeros(self.dim, 1))

    def basis_form(self, idx: int) -> "Form":
        return self.form([Fraction(t == idx) for t in range(self.dim)])

    def __repr__(self) -> str:
        return f"FormSpace({self.algebra.name}, degree={self.degree}, dim={self.dim})"


class Form:
    """A differential form: coordinate column over its FormSpace basis."""

    __slots__ = ("space", "vec")

    def __init__(self, space: FormSpace, vec: QMat):
        self.space = space
        self.vec = vec

    @property
    def degree(self) -> int:
        return self.space.degree

    def __add__(self, other: "Form") -> "Form":
        if self.space is not other.space:
            raise FormError("cannot add forms of different spaces")
        return Form(self.space, self.vec + other.vec)

    def __sub__(self, other: "Form") -> "Form":
        if self.space is not other.space:
            raise FormError("cannot subtract forms of different spaces")
        return Form(self.space, self.vec - other.vec)

    def __neg__(self) -> "Form":
        return Form(self.space, -self.vec)

    def scale(self, c) -> "Form":
        return Form(self.space, self.vec.scale(c))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Form) and self.space is other.space
                and self.vec == other.vec)

    def __hash__(self):  # pragma: no cover
        raise TypeError("Form is unhashable")

    def is_zero(self) -> bool:
        return self.vec.is_zero()

    def d(self) -> "Form":
        target = form_space(self.space.algebra, self.degree + 1)
        return Form(target, self.space.d_matrix() @ self.vec)

    def left_mult(self, a: Sequence[Fraction]) -> "Form":
        return Form(self.space, self.space.left_action(a) @ self.vec)

    def right_mult(self, b: Sequence[Fraction]) -> "Form":
        return Form(self.space, self.space.right_action(b) @ self.vec)

    def coords(self) -> list[Fraction]:
        return self.vec.column_fractions(0)

    def to_json(self) -> dict:
        from .linalg import format_scalar
        return {"degree": self.degree,
                "coords": [format_scalar(v) for v in self.coords()]}

    def __repr__(self) -> str:
        return f"Form(degree={self.degree}, coords={self.coords()})"


def form_from_json(algebra: Algebra, obj: dict) -> Form:
    from .linalg import parse_scalar
    sp = form_space(algebra, int(obj["degree"]))
    return sp.form([parse_scalar(s) for s in obj["coords"]])


def product(a: Form, b: Form) -> Form:
    """Concatenation product Omega_k x Omega_l -> Omega_{k+l}.

    (omega)(e_p dJ') = (omega.e_p) dJ': right-act by the leading coefficient
    of the second factor, then append its d-word.
    """
    if a.space.algebra is not b.space.algebra:
        raise FormError("cannot multiply forms over different algebras")
    A = a.space.algebra
    m = A.dim
    target = form_space(A, a.degree + b.degree)
    w = b.space._tail
    acc: Optional[QMat] = None
    for p in range(m):
        col = a.space.right[p] @ a.vec
        seg = QMat(b.vec.num[p * w:(p + 1) * w].reshape(1, w), b.vec.den)
        if seg.is_zero() or col.is_zero():
            continue
        block = col.kron(seg)  # (dim_a, w): row-major flatten = target index
        term = QMat(block.num.reshape(target.dim, 1), block.den)
        acc = term if acc is None else acc + term
    return Form(target, acc if acc is not None else QMat.zeros(target.dim, 1))


class GradedForm:
    """Inhomogeneous form truncated at degree N: components 0..N."""

    def __init__(self, algebra: Algebra, truncation: int,
                 components: Optional[Sequence[Form]] = None):
        self.algebra = algebra
        self.truncation = truncation
        if components is None:
            components = [form_space(algebra, k).zero()
                          for k in range(truncation + 1)]
        comps = list(components)
        if len(comps) != truncation + 1:
            raise FormError("need one component per degree 0..N")
        for k, c in enumerate(comps):
            if c.degree != k or c.space.algebra is not algebra:
                raise FormError("component in the wrong space")
        self.components = comps

    def __add__(self, other: "GradedForm") -> "GradedForm":
        n = min(self.truncation, other.truncation)
        return GradedForm(self.algebra, n, [
            self.components[k] + other.components[k] for k in range(n + 1)])

    def __mul__(self, other: "GradedForm") -> "GradedForm":
        n = min(self.truncation, other.truncation)
        out = [form_space(self.algebra, k).zero() for k in range(n + 1)]
        for i, a in enumerate(self.components):
            for j, b in enumerate(other.components):
                if i + j <= n:
                    out[i + j] = out[i + j] + product(a, b)
        return GradedForm(self.algebra, n, out)

    def d(self) -> "GradedForm":
        comps = [form_space(self.algebra, 0).zero()]
        comps += [self.components[k - 1].d() for k in range(1, self.truncation + 1)]
        return GradedForm(self.algebra, self.truncation, comps)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, GradedForm)
                and self.truncation == other.truncation
                and all(a == b for a, b in zip(self.components, other.components)))


# ---------------------------------------------------------------------------
# Functoriality
# ---------------------------------------------------------------------------


def omega_functor(f: AlgebraHom, degree: int) -> QMat:
    """Matrix of Omega_k(f): e_i dJ |-> f(e_i) d(f(e_{j1})) ... d(f(e_{jk}))."""
    A, B = f.source, f.target
    src = form_space(A, degree)
    tgt = form_space(B, degree)
    d0 = form_space(B, 0).d_matrix()
    dfs = [Form(form_space(B, 1), d0 @ f.matrix.col(j)) for j in range(A.dim)]
    cols: list[list[Fraction]] = []
    for idx in range(src.dim):
        i, J = src.tuple_of(idx)
        img = Form(form_space(B, 0), f.matrix.col(i))
        for j in J:
            img = product(img, dfs[j])
        cols.append(img.coords())
    if not cols or tgt.dim == 0:
        return QMat.zeros(tgt.dim, src.dim)
    return QMat.from_rows([[cols[c][r] for c in range(src.dim)]
                           for r in range(tgt.dim)])


# ---------------------------------------------------------------------------
# Kernel of iterated multiplication
# ---------------------------------------------------------------------------


def multiplication_matrix(algebra: Algebra, n: int) -> QMat:
    """mu^n : A^(x n) -> A as a matrix (m x m^n, big-endian index)."""
    if n < 1:
        raise FormError("multiplication arity must be >= 1")
    m = algebra.dim
    cols = []
    for flat in range(m ** n):
        digits = []
        x = flat
        for _ in range(n):
            x, r = divmod(x, m)
            digits.append(r)
        digits.reverse()
        vec = [Fraction(t == digits[0]) for t in range(m)]
        for dgt in digits[1:]:
            vec = algebra.mult_vec(vec, [Fraction(t == dgt) for t in range(m)])
        cols.append(vec)
    return QMat.from_rows([[cols[c][r] for c in range(m ** n)] for r in range(m)])


def kernel_of_mu_n(algebra: Algebra, n: int, size_cap: int = 100000) -> dict:
    """Does ker(mu^n) equal the sum of A^i (x) ker(mu^2) (x) A^(n-2-i)?

    Returns a report with both dimensions and the verdict.
    """
    if n < 2:
        raise FormError("kernel comparison needs arity >= 2")
    m = algebra.dim
    if m ** n > size_cap:
        raise FormError(f"tensor power dimension {m ** n} exceeds cap {size_cap}")
    from .linalg import nullspace
    mu = multiplication_matrix(algebra, n)
    ker = nullspace(mu.to_fraction_rows())
    k2 = nullspace(multiplication_matrix(algebra, 2).to_fraction_rows())
    red = RowReducer(m ** n)
    for i in range(n - 1):
        left_dim = m ** i
        right_dim = m ** (n - 2 - i)
        for v in k2.basis:
            for ls in range(left_dim):
                for rs in range(right_dim):
                    row = {}
                    for t, val in enumerate(v):
                        if val:
                            row[(ls * m * m + t) * right_dim + rs] = val
                    red.add(row)
    span = Subspace(m ** n, red.basis(), red.pivots(), _canonical=True)
    return {
        "arity": n,
        "dim_kernel": ker.dim,
        "dim_span": span.dim,
        "equal": ker == span,
    }


# ---------------------------------------------------------------------------
# Graded commutators and De Rham homology
# ---------------------------------------------------------------------------


def commutator_subspace(algebra: Algebra, r: int) -> Subspace:
    """Span of w.h - (-1)^{ab} h.w over basis forms with a + b = r."""
    sp_r = form_space(algebra, r)
    red = RowReducer(sp_r.dim)
    for a in range(r + 1):
        b = r - a
        if a > b:
            break  # [w,h] and [h,w] span the same lines
        sa, sb = form_space(algebra, a), form_space(algebra, b)
        sign = (-1) ** (a * b)
        for ia in range(sa.dim):
            wa = sa.basis_form(ia)
            for ib in range(sb.dim):
                hb = sb.basis_form(ib)
                comm = product(wa, hb).vec - product(hb, wa).vec.scale(sign)
                den = comm.den
                red.add({t: Fraction(int(v), den)
                         for t, v in enumerate(comm.num[:, 0]) if v})
    return Subspace(sp_r.dim, red.basis(), red.pivots(), _canonical=True)


def de_rham_homology(algebra: Algebra, truncation: int,
                     size_cap: int = 100000) -> dict:
    """Homology of the commutator quotient complex, exact up to degree N-1.

    Degree N is reported as a lower bound (the differential out of degree N
    would need the degree-(N+1) commutator space) and flagged.
    """
    N = truncation
    if N < 1:
        raise FormError("truncation must be >= 1")
    m = algebra.dim
    if m * max(1, (m - 1)) ** (N + 1) > size_cap:
        raise FormError("form space dimension exceeds cap")
    comm = [commutator_subspace(algebra, r) for r in range(N + 1)]
    quot_dims = [form_space(algebra, r).dim - comm[r].dim for r in range(N + 1)]
    # induced differentials on the quotient: reduce mod commutators, keep the
    # free coordinates
    reducers = []
    frees = []
    for r in range(N + 1):
        red = RowReducer(form_space(algebra, r).dim)
        for row in comm[r].basis:
            red.add_dense(row)
        reducers.append(red)
        pivset = set(red.pivots())
        frees.append([t for t in range(form_space(algebra, r).dim)
                      if t not in pivset])
    ranks = []
    kernels = []
    for r in range(N):
        sp = form_space(algebra, r)
        dmat = sp.d_matrix()
        red_im = RowReducer(form_space(algebra, r + 1).dim)
        cols = []
        for t in frees[r]:
            img = dmat.col(t).column_fractions(0)
            rep = reducers[r + 1].reduce_dense(img)
            cols.append([rep[u] for u in frees[r + 1]])
            red_im.add_dense(cols[-1])
        ranks.append(red_im.dim)
        kernels.append(quot_dims[r] - red_im.dim)
    dims = []
    for p in range(N):
        image_in = ranks[p - 1] if p >= 1 else 0
        dims.append(kernels[p] - image_in)
    # degree N: only a lower bound.  Without the degree-(N+1) commutator
    # space we can only see d(rep) = 0 on the nose, which undercounts the
    # kernel of the induced differential.
    dN = form_space(algebra, N).d_matrix()
    red_top = RowReducer(form_space(algebra, N + 1).dim)
    rank_top = 0
    for t in frees[N]:
        if red_top.add_dense(dN.col(t).column_fractions(0)):
            rank_top += 1
    kerN = len(frees[N]) - rank_top
    lower_N = max(0, kerN - (ranks[N - 1] if N >= 1 else 0))
    return {
        "truncation": N,
        "homology_dims": dims,                  # exact, degrees 0..N-1
        "top_degree_lower_bound": lower_N,      # degree N, flagged
        "top_degree_incomplete": True,
        "quotient_dims": quot_dims,
        "commutator_dims": [c.dim for c in comm],
    }
