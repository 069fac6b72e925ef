"""Exact dense linear algebra over ZZ and QQ for small dimensions.

Matrices are lists of row lists holding ints or Fractions.  Everything here
is exact; there is no floating point anywhere in the package's math.

Conventions:
  * Lattices are row spans.  The canonical form of an integer lattice is the
    row-style Hermite normal form: pivots positive, entries above each pivot
    reduced into [0, pivot), zero rows removed.  Two representations of the
    same lattice are equal as matrices.
  * Rational lattices are canonicalized by clearing the common denominator,
    taking the integer HNF and scaling back (HNF commutes with scaling).
  * Quadratic forms are symmetric Gram matrices; short vectors come from
    exact LLL followed by Fincke-Pohst enumeration with rational arithmetic.
"""

import math
from fractions import Fraction


def identity_matrix(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    rows, inner, cols = len(A), len(B), len(B[0])
    Bt = [[B[k][j] for k in range(inner)] for j in range(cols)]
    return [[sum(row[k] * col[k] for k in range(inner)) for col in Bt] for row in A]


def mat_vec(A, v):
    return [sum(A[i][k] * v[k] for k in range(len(v))) for i in range(len(A))]


def vec_mat(v, A):
    n = len(A[0])
    return [sum(v[k] * A[k][j] for k in range(len(v))) for j in range(n)]


def transpose(A):
    return [list(col) for col in zip(*A)]


def lcm(a, b):
    return a * b // math.gcd(a, b)


def denominator_lcm(rows):
    d = 1
    for row in rows:
        for x in row:
            if isinstance(x, Fraction):
                d = lcm(d, x.denominator)
    return d


def scale_to_int(rows):
    """Return (d, integer rows) with d minimal positive so d*rows is integral."""
    d = denominator_lcm(rows)
    out = []
    for row in rows:
        out.append([int(x * d) if isinstance(x, Fraction) else x * d for x in row])
    return d, out


# ---------------------------------------------------------------------------
# Hermite normal form


def hnf_rows_int(rows):
    """Row HNF of an integer matrix.  Returns (H, rank); H has no zero rows."""
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if m else 0
    r = 0
    for j in range(n):
        # Euclid on column j below row r until a single nonzero entry remains.
        while True:
            piv, best = -1, 0
            for i in range(r, m):
                a = A[i][j]
                if a != 0 and (piv < 0 or abs(a) < best):
                    piv, best = i, abs(a)
            if piv < 0:
                break
            if piv != r:
                A[r], A[piv] = A[piv], A[r]
            done = True
            p = A[r][j]
            for i in range(r + 1, m):
                if A[i][j] != 0:
                    q = A[i][j] // p
                    Ai, Ar = A[i], A[r]
                    for k in range(j, n):
                        Ai[k] -= q * Ar[k]
                    if Ai[j] != 0:
                        done = False
            if done:
                break
        if piv < 0:
            continue
        if A[r][j] < 0:
            A[r] = [-x for x in A[r]]
        p = A[r][j]
        for i in range(r):
            q = A[i][j] // p
            if q:
                Ai, Ar = A[i], A[r]
                for k in range(j, n):
                    Ai[k] -= q * Ar[k]
        r += 1
        if r == m:
            break
    return A[:r], r


def hnf_rows_transform(rows):
    """Like hnf_rows_int but tracks U with U*A = [H; 0].  Returns (H, U, rank)."""
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity_matrix(m)
    r = 0
    for j in range(n):
        while True:
            piv, best = -1, 0
            for i in range(r, m):
                a = A[i][j]
                if a != 0 and (piv < 0 or abs(a) < best):
                    piv, best = i, abs(a)
            if piv < 0:
                break
            if piv != r:
                A[r], A[piv] = A[piv], A[r]
                U[r], U[piv] = U[piv], U[r]
            done = True
            p = A[r][j]
            for i in range(r + 1, m):
                if A[i][j] != 0:
                    q = A[i][j] // p
                    Ai, Ar, Ui, Ur = A[i], A[r], U[i], U[r]
                    for k in range(n):
                        Ai[k] -= q * Ar[k]
                    for k in range(m):
                        Ui[k] -= q * Ur[k]
                    if Ai[j] != 0:
                        done = False
            if done:
                break
        if piv < 0:
            continue
        if A[r][j] < 0:
            A[r] = [-x for x in A[r]]
            U[r] = [-x for x in U[r]]
        p = A[r][j]
        for i in range(r):
            q = A[i][j] // p
            if q:
                Ai, Ar, Ui, Ur = A[i], A[r], U[i], U[r]
                for k in range(n):
                    Ai[k] -= q * Ar[k]
                for k in range(m):
                    Ui[k] -= q * Ur[k]
        r += 1
        if r == m:
            break
    return A[:r], U, r


def hnf_rows_frac(rows):
    """Canonical rational-lattice basis: HNF after clearing denominators,
    scaled back.  Returns (H as Fractions, rank)."""
    if not rows:
        return [], 0
    d, A = scale_to_int(rows)
    H, r = hnf_rows_int(A)
    return [[Fraction(x, d) for x in row] for row in H], r


def hnf_pivots(H):
    """Pivot column index of each HNF row."""
    cols = []
    for row in H:
        j = 0
        while row[j] == 0:
            j += 1
        cols.append(j)
    return cols


def in_rowspan_int(H, v):
    """Membership of integer vector v in the lattice with integer HNF basis H."""
    v = list(v)
    pivots = hnf_pivots(H)
    for row, j in zip(H, pivots):
        if v[j] % row[j] != 0:
            return False
        q = v[j] // row[j]
        if q:
            for k in range(j, len(v)):
                v[k] -= q * row[k]
    return all(x == 0 for x in v)


def solve_in_rowspan_int(H, v):
    """Coefficients x with x*H = v, or None.  H is an integer HNF basis."""
    v = list(v)
    pivots = hnf_pivots(H)
    coeffs = []
    for row, j in zip(H, pivots):
        if v[j] % row[j] != 0:
            return None
        q = v[j] // row[j]
        coeffs.append(q)
        if q:
            for k in range(j, len(v)):
                v[k] -= q * row[k]
    if any(x != 0 for x in v):
        return None
    return coeffs


def lattice_contains_frac(rows, v):
    """Membership of a rational vector in the lattice spanned by the rows
    (any basis; canonicalized internally)."""
    d1, A = scale_to_int(rows)
    Hi, _ = hnf_rows_int(A)
    w = [x * d1 for x in v]
    if any((not isinstance(x, int)) and x.denominator != 1 for x in w):
        return False
    return in_rowspan_int(Hi, [int(x) for x in w])


def left_kernel_int(A):
    """Basis of {x in ZZ^m : x*A = 0}, in HNF."""
    _, U, r = hnf_rows_transform(A)
    ker = U[r:]
    K, _ = hnf_rows_int(ker) if ker else ([], 0)
    return K


def intersect_rowspans(B1, B2):
    """Intersection of two rational lattices given by bases (row spans).

    Returns the canonical rational HNF basis of span_ZZ(B1) ^ span_ZZ(B2).
    """
    d1, A1 = scale_to_int(B1)
    d2, A2 = scale_to_int(B2)
    d = lcm(d1, d2)
    A1 = [[x * (d // d1) for x in row] for row in A1]
    A2 = [[x * (d // d2) for x in row] for row in A2]
    stacked = A1 + [[-x for x in row] for row in A2]
    ker = left_kernel_int(stacked)
    m1 = len(A1)
    vecs = []
    for row in ker:
        x = row[:m1]
        vecs.append([Fraction(c, d) for c in vec_mat(x, A1)])
    H, _ = hnf_rows_frac(vecs)
    return H


def preimage_integral(A):
    """Basis of the lattice {x in QQ^n : x*A in ZZ^m}.

    A must have full row-lattice rank n (its columns span QQ^n).
    """
    n = len(A)
    cols = transpose(A)
    P, r = hnf_rows_frac(cols)
    if r != n:
        raise ValueError("column span is not full rank")
    # x * P^T in ZZ^n  <=>  x in ZZ^n * (P^T)^{-1}
    return mat_inv(transpose(P))


def mat_inv(M):
    """Inverse of a square matrix over QQ (Gauss-Jordan, exact)."""
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((i for i in range(col, n) if A[i][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for i in range(n):
            if i != col and A[i][col] != 0:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[col])]
    return [row[n:] for row in A]


def det_int(M):
    """Determinant of an integer matrix (fraction-free Bareiss)."""
    n = len(M)
    A = [list(row) for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if piv is None:
                return 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def det_frac(M):
    n = len(M)
    d, A = scale_to_int(M)
    return Fraction(det_int(A), d ** n)


# ---------------------------------------------------------------------------
# Smith normal form


def snf_with_transform(M):
    """Smith normal form of an integer matrix.

    Returns (diag, V) where diag lists the nonzero invariant factors
    d_1 | d_2 | ... and V is the n x n unimodular column transform: for the
    row lattice L of M, L*V equals the diagonal lattice, so the class of x
    in ZZ^n / L has coordinates (x*V)_i mod d_i.
    """
    A = [list(r) for r in M]
    m = len(A)
    n = len(A[0]) if m else 0
    V = identity_matrix(n)
    t = 0
    while True:
        piv = None
        best = 0
        for i in range(t, m):
            for j in range(t, n):
                a = A[i][j]
                if a != 0 and (piv is None or abs(a) < best):
                    piv, best = (i, j), abs(a)
        if piv is None:
            break
        i0, j0 = piv
        if i0 != t:
            A[t], A[i0] = A[i0], A[t]
        if j0 != t:
            for row in A:
                row[t], row[j0] = row[j0], row[t]
            for row in V:
                row[t], row[j0] = row[j0], row[t]
        while True:
            # clear column t
            dirty = False
            p = A[t][t]
            for i in range(m):
                if i != t and A[i][t] != 0:
                    q = A[i][t] // p
                    for k in range(n):
                        A[i][k] -= q * A[t][k]
                    if A[i][t] != 0:
                        # remainder smaller than pivot: swap up and retry
                        A[t], A[i] = A[i], A[t]
                        dirty = True
                        p = A[t][t]
            # clear row t
            p = A[t][t]
            for j in range(n):
                if j != t and A[t][j] != 0:
                    q = A[t][j] // p
                    for row in A:
                        row[j] -= q * row[t]
                    for row in V:
                        row[j] -= q * row[t]
                    if A[t][j] != 0:
                        for row in A:
                            row[t], row[j] = row[j], row[t]
                        for row in V:
                            row[t], row[j] = row[j], row[t]
                        dirty = True
                        p = A[t][t]
            if not dirty and all(A[i][t] == 0 for i in range(m) if i != t) and all(
                A[t][j] == 0 for j in range(n) if j != t
            ):
                break
        # divisibility: fold in any entry not divisible by the pivot
        p = A[t][t]
        offender = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if A[i][j] % p != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            for k in range(n):
                A[t][k] += A[offender][k]
            continue
        t += 1
        if t >= m or t >= n:
            break
    diag = []
    for i in range(min(m, n)):
        if i < m and A[i][i] != 0:
            if A[i][i] < 0:
                for row in V:
                    row[i] = -row[i]
                A[i][i] = -A[i][i]
            diag.append(A[i][i])
    return diag, V


# ---------------------------------------------------------------------------
# Quadratic forms: exact LLL and enumeration


def gram_update_rowop(G, U, k, j, q):
    """Apply b_k <- b_k - q * b_j to the Gram matrix G and transform U."""
    n = len(G)
    for t in range(n):
        G[k][t] -= q * G[j][t]
    for t in range(n):
        G[t][k] -= q * G[t][j]
    for t in range(len(U[0])):
        U[k][t] -= q * U[j][t]


def gram_swap(G, U, k):
    """Swap basis vectors k-1 and k."""
    G[k - 1], G[k] = G[k], G[k - 1]
    for row in G:
        row[k - 1], row[k] = row[k], row[k - 1]
    U[k - 1], U[k] = U[k], U[k - 1]


def _gs_from_gram(G):
    """Gram-Schmidt data (mu, Bstar) of the current Gram matrix."""
    n = len(G)
    mu = [[Fraction(0)] * n for _ in range(n)]
    Bstar = [Fraction(0)] * n
    c = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = Fraction(G[i][j])
            for k in range(j):
                s -= mu[j][k] * c[i][k]
            c[i][j] = s
            if j < i:
                mu[i][j] = s / Bstar[j]
        Bstar[i] = c[i][i]
    return mu, Bstar


def _integral_gs(G):
    """Integral Gram-Schmidt data: d[i] = i-th principal minor determinant
    (d[0] = 1) and lam[i][j] = mu_ij * d[j+1], all integers."""
    n = len(G)
    d = [1] * (n + 1)
    lam = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            u = G[i][j]
            for k in range(j):
                u = (d[k + 1] * u - lam[i][k] * lam[j][k]) // d[k]
            if j < i:
                lam[i][j] = u
            else:
                d[i + 1] = u
    return d, lam


def lll_reduce_gram(G0, delta=None):
    """Exact LLL (delta = 3/4) on a positive-definite integer Gram matrix.

    Returns (U, G) with U unimodular and G = U * G0 * U^T LLL-reduced.
    All arithmetic is integral; the small fixed dimension makes full
    recomputation of the Gram-Schmidt data after each step cheap.
    """
    n = len(G0)
    G = [[int(x) for x in row] for row in G0]
    U = identity_matrix(n)
    d, lam = _integral_gs(G)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            D = d[j + 1]
            if 2 * abs(lam[k][j]) > D:
                q = (2 * lam[k][j] + D) // (2 * D)
                gram_update_rowop(G, U, k, j, q)
                lam[k][j] -= q * D
                for i in range(j):
                    lam[k][i] -= q * lam[j][i]
        lkk = lam[k][k - 1]
        if 4 * (d[k + 1] * d[k - 1] + lkk * lkk) < 3 * d[k] * d[k]:
            gram_swap(G, U, k)
            d, lam = _integral_gs(G)
            k = max(k - 1, 1)
        else:
            k += 1
    return U, G


def round_frac(x):
    """Nearest integer to a Fraction (ties toward even via Python round)."""
    if isinstance(x, int):
        return x
    return round(x)


def floor_sqrt_frac(x):
    """floor(sqrt(x)) for a nonnegative Fraction."""
    if x < 0:
        raise ValueError("negative value")
    num, den = x.numerator, x.denominator
    return math.isqrt(num * den) // den


def enumerate_gram(G, bound, include_zero=False):
    """All lattice vectors of squared length <= bound under the form G.

    Yields (coords, value) with coords an integer tuple; only one of each
    +/- pair is produced (first nonzero coordinate positive).  Exact
    Fincke-Pohst with rational arithmetic.
    """
    n = len(G)
    q = [[Fraction(G[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        if q[i][i] <= 0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    bound = Fraction(bound)
    x = [0] * n
    results = []

    def recurse(i, remaining, center_terms):
        # Q contribution of level i: q[i][i] * (x_i + s)^2 with s = center
        s = center_terms[i]
        rad2 = remaining / q[i][i]
        r = floor_sqrt_frac(rad2)
        lo = -r - s
        lo_int = math.ceil(lo)
        hi_int = math.floor(-s + r)
        # widen by one to be safe against floor-of-sqrt truncation
        for xi in range(lo_int - 1, hi_int + 2):
            val = q[i][i] * (xi + s) ** 2
            if val > remaining:
                continue
            x[i] = xi
            if i == 0:
                vec = tuple(x)
                if not any(vec) and not include_zero:
                    continue
                total = bound - (remaining - val)
                results.append((vec, total))
            else:
                new_centers = list(center_terms)
                for t in range(i):
                    new_centers[t] += q[t][i] * xi
                recurse(i - 1, remaining - val, new_centers)
        x[i] = 0

    recurse(n - 1, bound, [Fraction(0)] * n)
    # canonicalize sign and dedupe
    seen = {}
    for vec, val in results:
        first = next((c for c in vec if c != 0), 0)
        if first < 0:
            vec = tuple(-c for c in vec)
        if vec not in seen or seen[vec] > val:
            seen[vec] = val
    return sorted(seen.items(), key=lambda kv: (kv[1], kv[0]))


def shortest_vector_gram(G):
    """A nonzero vector minimizing the form G, via LLL then enumeration.

    Returns (coords, value) in the original basis coordinates.
    """
    U, Gr = lll_reduce_gram(G)
    bound = min(Gr[i][i] for i in range(len(Gr)))
    found = enumerate_gram(Gr, bound)
    vec, val = found[0]
    coords = vec_mat(list(vec), U)
    return coords, val
