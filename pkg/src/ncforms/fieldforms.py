"""Forms with values in fields: contraction, Lie operators, and brackets.

A field-valued k-form K is a bimodule homomorphism Omega_1 -> Omega_k.  By
universality it is determined by the derivation delta = K o d : A -> Omega_k,
and every Leibniz map arises this way, so K is *stored* as delta (a
dim Omega_k by m matrix) and extended back via K(a0 da1) = a0 . delta(a1).

Degree bookkeeping: the subscript of K is the target form degree; the
contraction j_K has operator degree (subscript - 1), the Lie operator
L_K = [j_K, d] has operator degree (subscript).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .algebra import Algebra, AlgebraHom, Bimodule, derivation_matrix, derivation_space
from .forms import Form, form_space
from .linalg import QMat, Subspace, qmat_sum, solve_linear


class FieldFormError(ValueError):
    pass


class FieldValuedForm:
    """K: Omega_1 -> Omega_k stored by its generating derivation delta."""

    def __init__(self, algebra: Algebra, degree: int, delta: QMat,
                 check: bool = True):
        if degree < 0:
            raise FieldFormError("field-valued form degree must be >= 0")
        self.algebra = algebra
        self.degree = degree
        self.delta = delta
        self._ext: Optional[QMat] = None
        if delta.shape != (form_space(algebra, degree).dim, algebra.dim):
            raise FieldFormError("delta matrix has the wrong shape")
        if check:
            self.validate()

    def validate(self) -> None:
        """delta(ab) = delta(a).b + a.delta(b) on all basis pairs."""
        A = self.algebra
        sp = form_space(A, self.degree)
        for i in range(A.dim):
            di = self.delta.col(i)
            for j in range(A.dim):
                dj = self.delta.col(j)
                dij = qmat_sum([self.delta.col(k).scale(A.structure[i][j][k])
                                for k in range(A.dim)])
                if dij != sp.right[j] @ di + sp.left[i] @ dj:
                    raise FieldFormError(
                        f"not a derivation into forms at basis pair ({i},{j})")

    def extension(self) -> QMat:
        """The bimodule-hom matrix Omega_1 -> Omega_k, K(e_i de_j) = e_i.delta(e_j)."""
        if self._ext is None:
            A = self.algebra
            sp = form_space(A, self.degree)
            m = A.dim
            cols = []
            for i in range(m):
                li = sp.left[i]
                for j in range(1, m):
                    cols.append((li @ self.delta.col(j)).column_fractions(0))
            self._ext = QMat.from_rows(
                [[cols[c][r] for c in range(len(cols))] for r in range(sp.dim)])
        return self._ext

    # -- linear structure ---------------------------------------------------

    def _same(self, other: "FieldValuedForm") -> None:
        if self.algebra is not other.algebra or self.degree != other.degree:
            raise FieldFormError("degree or algebra mismatch")

    def __add__(self, other: "FieldValuedForm") -> "FieldValuedForm":
        self._same(other)
        return FieldValuedForm(self.algebra, self.degree,
                               self.delta + other.delta, check=False)

    def __sub__(self, other: "FieldValuedForm") -> "FieldValuedForm":
        self._same(other)
        return FieldValuedForm(self.algebra, self.degree,
                               self.delta - other.delta, check=False)

    def __neg__(self) -> "FieldValuedForm":
        return FieldValuedForm(self.algebra, self.degree, -self.delta, check=False)

    def scale(self, c) -> "FieldValuedForm":
        return FieldValuedForm(self.algebra, self.degree, self.delta.scale(c),
                               check=False)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, FieldValuedForm)
                and self.algebra is other.algebra
                and self.degree == other.degree
                and self.delta == other.delta)

    def __hash__(self):  # pragma: no cover
        raise TypeError("FieldValuedForm is unhashable")

    def is_zero(self) -> bool:
        return self.delta.is_zero()

    def apply(self, w: Form) -> Form:
        if w.degree != 1:
            raise FieldFormError("field-valued forms act on one-forms")
        tgt = form_space(self.algebra, self.degree)
        return Form(tgt, self.extension() @ w.vec)

    def to_json(self) -> dict:
        from .linalg import format_scalar
        return {"degree": self.degree,
                "delta": [[format_scalar(v) for v in row]
                          for row in self.delta.to_fraction_rows()]}

    def __repr__(self) -> str:
        return f"FieldValuedForm(degree={self.degree}, algebra={self.algebra.name})"


def field_valued_form_from_json(algebra: Algebra, obj: dict) -> FieldValuedForm:
    from .linalg import parse_scalar
    delta = QMat.from_rows([[parse_scalar(v) for v in row]
                            for row in obj["delta"]])
    return FieldValuedForm(algebra, int(obj["degree"]), delta)


def zero_field_valued_form(algebra: Algebra, degree: int) -> FieldValuedForm:
    return FieldValuedForm(
        algebra, degree,
        QMat.zeros(form_space(algebra, degree).dim, algebra.dim), check=False)


def identity_one_form(algebra: Algebra) -> FieldValuedForm:
    """Id of Omega_1 as a field-valued one-form: delta(a) = da."""
    return FieldValuedForm(algebra, 1, form_space(algebra, 0).d_matrix(),
                           check=False)


def field_from_derivation(algebra: Algebra, dmat: QMat) -> FieldValuedForm:
    """A derivation A -> A as a degree-0 field."""
    return FieldValuedForm(algebra, 0, dmat)


def field_valued_form_space(algebra: Algebra, degree: int) -> list[FieldValuedForm]:
    """Basis of Omega^1_degree = derivations A -> Omega_degree."""
    sp = form_space(algebra, degree)
    mod = sp.as_bimodule()
    basis = derivation_space(mod)
    return [FieldValuedForm(algebra, degree, derivation_matrix(mod, vec),
                            check=False)
            for vec in basis.basis]


def field_space(algebra: Algebra) -> list[FieldValuedForm]:
    return field_valued_form_space(algebra, 0)


# ---------------------------------------------------------------------------
# Graded derivations of the form algebra
# ---------------------------------------------------------------------------


class GradedDerivation:
    """Degree-k operator on forms: one matrix per stored input degree.

    ``mats[j]`` is the matrix Omega_j -> Omega_{j+k}; the value None encodes
    the zero map whose nominal target degree is negative.  Operators are
    compared and combined on common stored degrees only.
    """

    def __init__(self, algebra: Algebra, degree: int,
                 mats: dict[int, Optional[QMat]]):
        self.algebra = algebra
        self.degree = degree
        self.mats = dict(mats)

    def input_degrees(self) -> list[int]:
        return sorted(self.mats)

    def mat(self, j: int) -> Optional[QMat]:
        if j not in self.mats:
            raise FieldFormError(f"operator not stored on input degree {j}")
        return self.mats[j]

    def apply(self, w: Form) -> Form:
        m = self.mat(w.degree)
        if m is None:
            raise FieldFormError("operator maps this degree below zero")
        tgt = form_space(self.algebra, w.degree + self.degree)
        return Form(tgt, m @ w.vec)

    def _zeros(self, j: int) -> QMat:
        return QMat.zeros(form_space(self.algebra, j + self.degree).dim,
                          form_space(self.algebra, j).dim)

    def __add__(self, other: "GradedDerivation") -> "GradedDerivation":
        if self.degree != other.degree:
            raise FieldFormError("cannot add operators of different degrees")
        out: dict[int, Optional[QMat]] = {}
        for j in set(self.mats) & set(other.mats):
            a, b = self.mats[j], other.mats[j]
            if a is None and b is None:
                out[j] = None
            else:
                a = a if a is not None else self._zeros(j)
                b = b if b is not None else other._zeros(j)
                out[j] = a + b
        return GradedDerivation(self.algebra, self.degree, out)

    def __sub__(self, other: "GradedDerivation") -> "GradedDerivation":
        return self + other.scale(-1)

    def scale(self, c) -> "GradedDerivation":
        return GradedDerivation(self.algebra, self.degree, {
            j: (m.scale(c) if m is not None else None)
            for j, m in self.mats.items()})

    def compose(self, other: "GradedDerivation") -> "GradedDerivation":
        """self o other, on every input degree where both are stored."""
        out: dict[int, Optional[QMat]] = {}
        for j, fm in other.mats.items():
            jj = j + other.degree
            if fm is None:
                # other is zero into a negative degree; composite is zero
                if j + other.degree + self.degree < 0:
                    out[j] = None
                else:
                    out[j] = QMat.zeros(
                        form_space(self.algebra,
                                   j + other.degree + self.degree).dim,
                        form_space(self.algebra, j).dim)
                continue
            if jj not in self.mats:
                continue
            em = self.mats[jj]
            out[j] = None if em is None else em @ fm
        return GradedDerivation(self.algebra, self.degree + other.degree, out)

    def commutator(self, other: "GradedDerivation") -> "GradedDerivation":
        sign = (-1) ** ((self.degree * other.degree) % 2)
        a = self.compose(other)
        b = other.compose(self).scale(sign)
        return a - b

    def agrees_with(self, other: "GradedDerivation") -> bool:
        """Equality on common stored degrees (requires at least one)."""
        if self.degree != other.degree:
            return False
        common = set(self.mats) & set(other.mats)
        if not common:
            raise FieldFormError("operators share no stored degree")
        for j in common:
            a, b = self.mats[j], other.mats[j]
            if (a is None) != (b is None):
                return False
            if a is not None and a != b:
                return False
        return True

    def is_zero(self) -> bool:
        return all(m is None or m.is_zero() for m in self.mats.values())

    def __repr__(self) -> str:
        return (f"GradedDerivation(degree={self.degree}, "
                f"inputs={self.input_degrees()})")


def d_operator(algebra: Algebra, max_input: int) -> GradedDerivation:
    return GradedDerivation(algebra, 1, {
        j: form_space(algebra, j).d_matrix() for j in range(max_input + 1)})


def contraction(K: FieldValuedForm, max_input: int) -> GradedDerivation:
    """j_K: the algebraic derivation replacing one d-slot by K.

    On a basis form e_{i0} de_{j1}...de_{jn} the s-th term rewrites slot s:

        (prefix . lead-coefficient-of-delta) (x) delta-tail (x) suffix,

    realized as sum_p R_{Omega_{s-1}}[e_p] (x) W_p (x) I with W_p the slice
    of delta with leading index p; the sign is (-1)^{(s-1)(k-1)} for K of
    subscript k.  Input degree 0 is killed.
    """
    A = K.algebra
    m = A.dim
    kappa = K.degree
    opdeg = kappa - 1
    tail_k = (m - 1) ** kappa
    # W_p : slot -> delta tail block, shape ((m-1)^kappa, m-1)
    Ws = []
    for p in range(m):
        rows = [[K.delta.entry(p * tail_k + t, j) for j in range(1, m)]
                for t in range(tail_k)]
        if not rows or not rows[0]:
            Ws.append(QMat.zeros(tail_k, m - 1))
        else:
            Ws.append(QMat.from_rows(rows))
    mats: dict[int, Optional[QMat]] = {}
    mats[0] = (None if opdeg < 0
               else QMat.zeros(form_space(A, opdeg).dim, form_space(A, 0).dim))
    for n in range(1, max_input + 1):
        tgt = form_space(A, n + opdeg)
        acc = QMat.zeros(tgt.dim, form_space(A, n).dim)
        for s in range(1, n + 1):
            prefix = form_space(A, s - 1)
            suffix = QMat.eye((m - 1) ** (n - s))
            term = None
            for p in range(m):
                if Ws[p].is_zero():
                    continue
                piece = prefix.right[p].kron(Ws[p]).kron(suffix)
                term = piece if term is None else term + piece
            if term is None:
                continue
            if ((s - 1) * (kappa - 1)) % 2:
                term = term.scale(-1)
            acc = acc + term
        mats[n] = acc
    return GradedDerivation(A, opdeg, mats)


def lie_operator(K: FieldValuedForm, max_input: int) -> GradedDerivation:
    """L_K = [j_K, d] = j_K o d - (-1)^(k-1) d o j_K for K of subscript k."""
    A = K.algebra
    jk = contraction(K, max_input + 1)
    sign = (-1) ** ((K.degree - 1) % 2)
    mats: dict[int, Optional[QMat]] = {}
    for j in range(max_input + 1):
        first = jk.mats[j + 1] @ form_space(A, j).d_matrix()
        second = jk.mats[j]
        if second is None:
            mats[j] = first
        else:
            dmat = form_space(A, j + K.degree - 1).d_matrix()
            mats[j] = first - (dmat @ second).scale(sign)
    return GradedDerivation(A, K.degree, mats)


def lie_bracket_fields(X: FieldValuedForm, Y: FieldValuedForm) -> FieldValuedForm:
    if X.degree != 0 or Y.degree != 0:
        raise FieldFormError("lie bracket of fields needs degree 0")
    return FieldValuedForm(X.algebra, 0,
                           X.delta @ Y.delta - Y.delta @ X.delta, check=False)


def algebraic_bracket(K: FieldValuedForm, L: FieldValuedForm) -> FieldValuedForm:
    """[K,L]^Delta = j_K o L - (-1)^{(k-1)(l-1)} j_L o K, subscripts k,l >= 1."""
    if K.degree < 1 or L.degree < 1:
        raise FieldFormError("algebraic bracket needs subscripts >= 1")
    A = K.algebra
    jk = contraction(K, L.degree)
    jl = contraction(L, K.degree)
    sign = (-1) ** (((K.degree - 1) * (L.degree - 1)) % 2)
    delta = jk.mats[L.degree] @ L.delta - (jl.mats[K.degree] @ K.delta).scale(sign)
    return FieldValuedForm(A, K.degree + L.degree - 1, delta, check=False)


def fn_bracket(K: FieldValuedForm, L: FieldValuedForm) -> FieldValuedForm:
    """Graded bracket characterized by [L_K, L_L] = L_([K,L])."""
    if K.algebra is not L.algebra:
        raise FieldFormError("algebra mismatch")
    lk = lie_operator(K, L.degree)
    ll = lie_operator(L, K.degree)
    sign = (-1) ** ((K.degree * L.degree) % 2)
    delta = lk.mats[L.degree] @ L.delta - (ll.mats[K.degree] @ K.delta).scale(sign)
    return FieldValuedForm(K.algebra, K.degree + L.degree, delta, check=False)


def insertion_compose(K: FieldValuedForm, L: FieldValuedForm) -> FieldValuedForm:
    """j_K o L as a field-valued form (delta = j_K applied to L's delta)."""
    jk = contraction(K, L.degree)
    out = jk.mats[L.degree] @ L.delta
    return FieldValuedForm(K.algebra, L.degree + K.degree - 1, out, check=False)


def is_graded_derivation(D: GradedDerivation, max_total: Optional[int] = None) -> bool:
    """Graded Leibniz D(wh) = D(w)h + (-1)^{k deg w} w D(h) on basis pairs."""
    from .forms import product
    A = D.algebra
    k = D.degree
    degs = D.input_degrees()
    top = max(degs)
    if max_total is None:
        max_total = top
    for a in degs:
        for b in degs:
            if a + b > min(top, max_total) or (a + b) not in D.mats:
                continue
            if D.mats[a] is None or D.mats[b] is None or D.mats[a + b] is None:
                continue
            spa, spb = form_space(A, a), form_space(A, b)
            for ia in range(spa.dim):
                w = spa.basis_form(ia)
                dw = D.apply(w)
                for ib in range(spb.dim):
                    h = spb.basis_form(ib)
                    lhs = D.apply(product(w, h))
                    rhs = product(dw, h)
                    sgn = (-1) ** ((k * a) % 2)
                    rhs = rhs + product(w, D.apply(h)).scale(sgn)
                    if lhs != rhs:
                        return False
    return True


def decompose_derivation(D: GradedDerivation,
                         check_input: bool = True) -> tuple[FieldValuedForm, FieldValuedForm]:
    """Split D = L_K + j_L; K from D|A, L from (D - L_K)|Omega_1."""
    A = D.algebra
    k = D.degree
    if k < 0:
        raise FieldFormError("decomposition needs operator degree >= 0")
    if 0 not in D.mats or 1 not in D.mats:
        raise FieldFormError("need the operator on degrees 0 and 1")
    if check_input and not is_graded_derivation(D):
        raise FieldFormError("operator is not a graded derivation")
    delta_K = D.mats[0]
    K = FieldValuedForm(A, k, delta_K)  # validates Leibniz
    lk = lie_operator(K, 1)
    resid = D.mats[1] - lk.mats[1]
    delta_L = resid @ form_space(A, 0).d_matrix()
    L = FieldValuedForm(A, k + 1, delta_L)
    return K, L


def reconstruct_derivation(K: FieldValuedForm, L: FieldValuedForm,
                           max_input: int) -> GradedDerivation:
    """L_K + j_L on input degrees 0..max_input."""
    if L.degree != K.degree + 1:
        raise FieldFormError("expected subscripts (k, k+1)")
    return lie_operator(K, max_input) + contraction(L, max_input)


# ---------------------------------------------------------------------------
# Identity suites
# ---------------------------------------------------------------------------


def check_lie_contraction_identity(K: FieldValuedForm, L: FieldValuedForm,
                                   trunc: int) -> bool:
    """[L_K, j_L] = j([K,L]) - (-1)^{k l} L(j_L o K), for K of subscript k
    and L of subscript l+1; operators compared on input degrees <= trunc."""
    k = K.degree
    ell = L.degree - 1
    lk = lie_operator(K, trunc + max(ell, 0))
    jl = contraction(L, trunc + max(k, 0))
    lhs = lk.commutator(jl)
    fnkl = fn_bracket(K, L)
    rhs = contraction(fnkl, trunc)
    jlk = insertion_compose(L, K)
    sign = (-1) ** ((k * ell) % 2)
    rhs = rhs - lie_operator(jlk, trunc).scale(sign)
    keep = {j: lhs.mats[j] for j in range(trunc + 1) if j in lhs.mats}
    lhs = GradedDerivation(K.algebra, lhs.degree, keep)
    return lhs.agrees_with(rhs)


def check_bracket_expansion_identities(K1: FieldValuedForm, K2: FieldValuedForm,
                                       L1: FieldValuedForm, L2: FieldValuedForm,
                                       trunc: int) -> dict:
    """The three expansion identities tying L, j, FN and Delta brackets.

    Requires subscripts L_i = subscript K_i + 1.  The first is an operator
    identity (checked to ``trunc``); the other two are exact identities of
    field-valued forms.
    """
    A = K1.algebra
    k1, k2 = K1.degree, K2.degree
    if L1.degree != k1 + 1 or L2.degree != k2 + 1:
        raise FieldFormError("expected subscripts (k_i, k_i + 1)")
    report = {}

    # (1) [L_{K1} + j_{L1}, L_{K2} + j_{L2}]
    #       = L([K1,K2] + j_{L1} K2 - (-1)^{k1 k2} j_{L2} K1)
    #       + j([L1,L2]^Delta + [K1,L2] - (-1)^{k1 k2} [K2,L1])
    head = trunc + max(k1, k2)
    d1 = lie_operator(K1, head) + contraction(L1, head)
    d2 = lie_operator(K2, head) + contraction(L2, head)
    lhs = d1.commutator(d2)
    sgn = (-1) ** ((k1 * k2) % 2)
    lpart = fn_bracket(K1, K2) + insertion_compose(L1, K2) \
        - insertion_compose(L2, K1).scale(sgn)
    jpart = algebraic_bracket(L1, L2) + fn_bracket(K1, L2) \
        - fn_bracket(K2, L1).scale(sgn)
    rhs = lie_operator(lpart, trunc) + contraction(jpart, trunc)
    keep = {j: lhs.mats[j] for j in range(trunc + 1) if j in lhs.mats}
    report["operator_commutator"] = GradedDerivation(
        A, lhs.degree, keep).agrees_with(rhs)

    # (2) j_L [K1,K2] = [j_L K1, K2] + (-1)^{k1 l} [K1, j_L K2]
    #       - ((-1)^{k1 l} j([K1,L]) K2 - (-1)^{(k1+l) k2} j([K2,L]) K1)
    for name, L in (("insertion_into_fn", L1),):
        ell = L.degree - 1
        lhs2 = insertion_compose(L, fn_bracket(K1, K2))
        t1 = fn_bracket(insertion_compose(L, K1), K2)
        t2 = fn_bracket(K1, insertion_compose(L, K2)).scale(
            (-1) ** ((k1 * ell) % 2))
        t3 = insertion_compose(fn_bracket(K1, L), K2).scale(
            (-1) ** ((k1 * ell) % 2))
        t4 = insertion_compose(fn_bracket(K2, L), K1).scale(
            (-1) ** (((k1 + ell) * k2) % 2))
        report[name] = (lhs2 == t1 + t2 - (t3 - t4))

    # (3) [K, [L1,L2]^D] = [[K,L1], L2]^D + (-1)^{k k1} [L1, [K,L2]]^D
    #       - ((-1)^{k k1} [j(L1) K, L2] - (-1)^{(k+k1) k2} [j(L2) K, L1])
    for name, K in (("fn_into_algebraic", K1),):
        k = K.degree
        lhs3 = fn_bracket(K, algebraic_bracket(L1, L2))
        u1 = algebraic_bracket(fn_bracket(K, L1), L2)
        u2 = algebraic_bracket(L1, fn_bracket(K, L2)).scale(
            (-1) ** ((k * k1) % 2))
        u3 = fn_bracket(insertion_compose(L1, K), L2).scale(
            (-1) ** ((k * k1) % 2))
        u4 = fn_bracket(insertion_compose(L2, K), L1).scale(
            (-1) ** (((k + k1) * k2) % 2))
        report[name] = (lhs3 == u1 + u2 - (u3 - u4))

    report["all"] = all(v for v in report.values())
    return report


# ---------------------------------------------------------------------------
# Naturality
# ---------------------------------------------------------------------------


def f_related(f: AlgebraHom, K: FieldValuedForm, Kp: FieldValuedForm) -> bool:
    """K' o Omega_1(f) = Omega_k(f) o K as matrices."""
    from .forms import omega_functor
    if K.degree != Kp.degree:
        return False
    lhs = Kp.extension() @ omega_functor(f, 1)
    rhs = omega_functor(f, K.degree) @ K.extension()
    return lhs == rhs


def pushforward(f: AlgebraHom, K: FieldValuedForm) -> Optional[FieldValuedForm]:
    """The f-related form on the target, when one exists (f surjective).

    Solves delta'(f(e_i)) = Omega_k(f)(delta(e_i)) for delta'; returns None
    when the system is inconsistent (K does not descend).
    """
    from .forms import omega_functor
    B = f.target
    tgt_dim = form_space(B, K.degree).dim
    T = omega_functor(f, K.degree) @ K.delta   # tgt_dim x m
    Ft = f.matrix.T.to_fraction_rows()         # m x m'
    rows_out = []
    for r in range(tgt_dim):
        rhs = [T.entry(r, i) for i in range(K.algebra.dim)]
        sol = solve_linear(Ft, rhs)
        if sol is None:
            return None
        rows_out.append(sol)
    delta_p = QMat.from_rows(rows_out) if rows_out else QMat.zeros(0, B.dim)
    try:
        return FieldValuedForm(B, K.degree, delta_p)
    except FieldFormError:
        return None


def naturality_report(f: AlgebraHom, K1: FieldValuedForm, K2: FieldValuedForm,
                      K1p: FieldValuedForm, K2p: FieldValuedForm) -> dict:
    """Given two f-related pairs, are the derived brackets f-related too?"""
    rep = {
        "pairs_related": f_related(f, K1, K1p) and f_related(f, K2, K2p),
        "fn_bracket_related": f_related(
            f, fn_bracket(K1, K2), fn_bracket(K1p, K2p)),
    }
    if K1.degree >= 1 and K2.degree >= 1:
        rep["algebraic_bracket_related"] = f_related(
            f, algebraic_bracket(K1, K2), algebraic_bracket(K1p, K2p))
        rep["insertion_related"] = f_related(
            f, insertion_compose(K1, K2), insertion_compose(K1p, K2p))
    rep["all"] = all(v for v in rep.values())
    return rep
