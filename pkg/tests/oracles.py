"""Independent reference implementations used only by the test suite.

Each oracle recomputes a quantity by a different algorithm (or a different
library) than the package under test, so agreement is meaningful.
"""

from fractions import Fraction

import sympy


def sympy_rref(rows):
    """RREF via sympy: returns (rows-as-Fraction, pivot tuple)."""
    M = sympy.Matrix([[sympy.Rational(v) for v in r] for r in rows])
    R, piv = M.rref()
    out = [[Fraction(int(x.p), int(x.q)) for x in R.row(i)] for i in range(R.rows)]
    out = [r for r in out if any(r)]
    return out, tuple(piv)


def sympy_nullspace_dim(rows):
    M = sympy.Matrix([[sympy.Rational(v) for v in r] for r in rows])
    return len(M.nullspace())


def sympy_rank(rows):
    M = sympy.Matrix([[sympy.Rational(v) for v in r] for r in rows])
    return M.rank()


# ---------------------------------------------------------------------------
# Independent model of differential forms inside tensor powers of A.
#
# Degree-n forms embed into A^(x (n+1)) via
#     a0 da1 ... dan  |->  a0 (.) delta(a1) (.) ... (.) delta(an)
# where delta(a) = 1 (x) a - a (x) 1 and (.) is the concatenation product
# that multiplies adjacent slots.  In this model the right action is just
# "multiply the last slot", d is "prepend a delta", and the product is
# concatenation -- all trivially correct, so agreement with the package's
# basis-level formulas is a real check.
# ---------------------------------------------------------------------------


def _digits(flat, base, width):
    out = []
    for _ in range(width):
        flat, r = divmod(flat, base)
        out.append(r)
    return list(reversed(out))


def _flat(digits, base):
    out = 0
    for d in digits:
        out = out * base + d
    return out


def emb_delta(alg, j):
    """delta(e_j) = 1 (x) e_j - e_j (x) 1 as {flat index: coeff} in A (x) A."""
    m = alg.dim
    return {_flat([0, j], m): Fraction(1), _flat([j, 0], m): Fraction(-1)}


def emb_concat(alg, x, p, y, q):
    """Concatenation product A^(p+1) x A^(q+1) -> A^(p+q+1) (merge middle)."""
    m = alg.dim
    out = {}
    for ix, vx in x.items():
        dx = _digits(ix, m, p + 1)
        for iy, vy in y.items():
            dy = _digits(iy, m, q + 1)
            merged = alg.structure[dx[-1]][dy[0]]
            for k in range(m):
                if merged[k]:
                    idx = _flat(dx[:-1] + [k] + dy[1:], m)
                    val = out.get(idx, Fraction(0)) + vx * vy * merged[k]
                    if val:
                        out[idx] = val
                    else:
                        out.pop(idx, None)
    return out


def emb_basis_form(alg, i, J):
    """Embedded image of the basis form e_i dJ."""
    vec = {i: Fraction(1)}
    deg = 0
    for j in J:
        vec = emb_concat(alg, vec, deg, emb_delta(alg, j), 1)
        deg += 1
    return vec


def emb_right_mult(alg, x, n, b):
    """(x0 (x) ... (x) xn) . e_b: multiply the last slot."""
    m = alg.dim
    out = {}
    for ix, vx in x.items():
        dx = _digits(ix, m, n + 1)
        prods = alg.structure[dx[-1]][b]
        for k in range(m):
            if prods[k]:
                idx = _flat(dx[:-1] + [k], m)
                val = out.get(idx, Fraction(0)) + vx * prods[k]
                if val:
                    out[idx] = val
                else:
                    out.pop(idx, None)
    return out


def emb_scale_add(acc, vec, c):
    for idx, v in vec.items():
        val = acc.get(idx, Fraction(0)) + c * v
        if val:
            acc[idx] = val
        else:
            acc.pop(idx, None)
    return acc


def bareiss_rank(rows):
    """Fraction-free Gaussian elimination (Bareiss) rank over the integers.

    Input rows may be Fractions; they are cleared to integers first.
    """
    rows = [list(map(Fraction, r)) for r in rows]
    if not rows:
        return 0
    den = 1
    for r in rows:
        for v in r:
            q = v.denominator
            den = den * q // __import__("math").gcd(den, q)
    m = [[int(v * den) for v in r] for r in rows]
    nrows, ncols = len(m), len(m[0])
    prev = 1
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == nrows:
            break
    return r


def sympy_commutant_dim(mats, n):
    """Dim of {E : E M = M E for all M}, solved entirely inside sympy."""
    import sympy

    rows = []
    for M in mats:
        S = sympy.Matrix([[sympy.Rational(v) for v in row] for row in M])
        for r in range(n):
            for c in range(n):
                row = [sympy.Integer(0)] * (n * n)
                for k in range(n):
                    row[k * n + c] += S[r, k]
                    row[r * n + k] -= S[k, c]
                if any(row):
                    rows.append(row)
    if not rows:
        return n * n
    return n * n - sympy.Matrix(rows).rank()


def emb_bar_projection(alg, vec, n):
    """Project A^(x)(n+1) onto A (x) Abar^(n-1) (x) A.

    Terms with a unit in a middle slot are dropped; middle digits reindex to
    base m-1 while the outer slots keep base m (big-endian throughout).
    """
    m = alg.dim
    out = {}
    for idx, v in vec.items():
        d = _digits(idx, m, n + 1)
        if any(t == 0 for t in d[1:-1]):
            continue
        flat = d[0]
        for t in d[1:-1]:
            flat = flat * (m - 1) + (t - 1)
        out[flat * m + d[-1]] = v
    return out


def emb_comparison_columns(alg, n):
    """Independent route to the comparison map forms -> A(x)Abar^(n-1)(x)A.

    Each basis form is embedded into A^(x)(n+1) (da = 1(x)a - a(x)1, with
    junction multiplication) and the middle slots are bar-projected.  The
    result differs from the displayed coboundary construction by the sign
    (-1)^n: each embedded da carries the opposite sign convention, and the
    surviving all-left/all-right selections flip n - 2p times.
    """
    from ncforms.forms import form_space

    m = alg.dim
    sp = form_space(alg, n)
    height = m * m * (m - 1) ** (n - 1)
    cols = []
    for idx in range(sp.dim):
        i, J = sp.tuple_of(idx)
        proj = emb_bar_projection(alg, emb_basis_form(alg, i, J), n)
        col = [Fraction(0)] * height
        for f, v in proj.items():
            col[f] = v
        cols.append(col)
    return cols


def sympy_hochschild_dim(alg, n):
    """dim H^n(A, A) from the normalized complex, entirely inside sympy."""
    m = alg.dim
    struct = alg.structure

    def bar_tuples(k):
        if k == 0:
            return [()]
        return [t + (j,) for t in bar_tuples(k - 1) for j in range(1, m)]

    def delta_rank_and_kernel(k):
        """(rank, kernel dim) of the degree-k coboundary on A-valued cochains."""
        src = bar_tuples(k)
        src_pos = {t: i for i, t in enumerate(src)}
        rows = []
        for K in bar_tuples(k + 1):
            for r in range(m):
                row = [sympy.Integer(0)] * (len(src) * m)
                for s in range(m):
                    # e_{k1} . c(K[1:]) has e_r-component struct[k1][s][r]
                    row[src_pos[K[1:]] * m + s] += sympy.Rational(struct[K[0]][s][r])
                    row[src_pos[K[:-1]] * m + s] += (
                        sympy.Integer(-1) ** (k + 1)
                        * sympy.Rational(struct[s][K[-1]][r]))
                for t in range(k):
                    prod = struct[K[t]][K[t + 1]]
                    for p in range(1, m):
                        if prod[p]:
                            merged = K[:t] + (p,) + K[t + 2:]
                            row[src_pos[merged] * m + r] += (
                                sympy.Integer(-1) ** (t + 1)
                                * sympy.Rational(prod[p]))
                rows.append(row)
        if not rows or not rows[0]:
            return 0, len(src) * m
        mat = sympy.Matrix(rows)
        rk = mat.rank()
        return rk, len(src) * m - rk

    _, z = delta_rank_and_kernel(n)
    if n == 0:
        return z
    b, _ = delta_rank_and_kernel(n - 1)
    return z - b


def sympy_polyderivation_dim(alg, arity: int) -> int:
    """Dimension of the skew first-slot-Leibniz maps A^arity -> A, computed
    from the structure constants entirely in sympy."""
    import itertools

    import sympy

    m = alg.dim
    struct = [[[sympy.Rational(alg.structure[i][j][r]) for r in range(m)]
               for j in range(m)] for i in range(m)]
    tuples = list(itertools.product(range(m), repeat=arity))
    pos = {T: i for i, T in enumerate(tuples)}
    nunk = len(tuples) * m  # unknown K(T)[r] at pos[T]*m + r
    rows = []
    for T in tuples:
        for t in range(arity - 1):
            S = T[:t] + (T[t + 1], T[t]) + T[t + 2:]
            if pos[S] < pos[T]:
                continue
            for r in range(m):
                row = [sympy.Integer(0)] * nunk
                row[pos[T] * m + r] += 1
                row[pos[S] * m + r] += 1
                rows.append(row)
    for rest in itertools.product(range(m), repeat=arity - 1):
        for i in range(m):
            for j in range(m):
                for r in range(m):
                    row = [sympy.Integer(0)] * nunk
                    for q in range(m):
                        if struct[i][j][q]:
                            row[pos[(q,) + rest] * m + r] += struct[i][j][q]
                    for s in range(m):
                        # e_i . K(e_j, rest) and K(e_i, rest) . e_j
                        row[pos[(j,) + rest] * m + s] -= struct[i][s][r]
                        row[pos[(i,) + rest] * m + s] -= struct[s][j][r]
                    rows.append(row)
    if not rows:
        return nunk
    return nunk - sympy.Matrix(rows).rank()
