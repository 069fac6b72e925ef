"""Ideal arithmetic in O_F and in orders of K.

F-side: every ideal of O_F is principal here (the drivers require narrow
class number 1), so valuations and quotients go through explicit generators
found by short-vector search under the trace form, with termination bounded
by the fundamental unit.

K-side: ideals are integer HNF matrices over their owner's basis and all
products stay in integer arithmetic via the owner's structure constants.
Primes over an admissible rational prime l come from factoring the Weil
polynomial mod l; the prime attached to a factor r is l*O + r(pi)*O, its
conjugate is the factor whose roots are q/(roots of r).  Reduction of an
ideal to a small equivalent one takes the shortest vector w of the
conjugate ideal under the T2 form and rescales by w / nu, where nu
generates the relative norm; the result is certified by an exact lattice
equality b = (w/nu) * a.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from . import arith, fppoly, linalg
from .errors import (
    FactorizationFailure,
    NotInvertible,
    OwnerMismatch,
    UndesirablePrime,
)
from .field_core import FieldElem
from .orders import KIdeal, OFIdeal


# ---------------------------------------------------------------------------
# Real quadratic side


@dataclass(frozen=True)
class RealPrime:
    """Prime ideal of O_F over the rational prime ell."""

    ell: int
    hnf: tuple            # 2x2 integer HNF over {1, w}
    residue_degree: int

    @property
    def norm(self):
        return self.ell ** self.residue_degree

    def ideal(self, ctx):
        return OFIdeal(ctx, [list(r) for r in self.hnf])

    def sort_key(self):
        return (self.norm, self.hnf)


def real_primes_over(ctx, ell):
    """Primes of O_F over ell, from factoring the minimal polynomial of w."""
    D = ctx.real.disc
    minpoly = [D * (D - 1) // 4, -D, 1]
    _, facs = fppoly.factor(minpoly, ell, seed=0)
    out = []
    if len(facs) == 1 and len(facs[0][0]) == 3:
        # inert
        out.append(RealPrime(ell, ((ell, 0), (0, ell)), 2))
        return out
    for g, e in facs:
        t = (-g[0]) % ell
        ideal = OFIdeal.from_generators(ctx, [(ell, 0), (-t, 1)])
        out.append(RealPrime(ell, ideal.hnf, 1))
    return sorted(set(out), key=lambda P: P.sort_key())


def f_inverse(ctx, x):
    """Inverse of u + v*w in F, as a Fraction pair."""
    real = ctx.real
    n = real.f_norm(x[0], x[1])
    if n == 0:
        raise ZeroDivisionError("inverse of zero in F")
    cu, cv = real.f_conj(x)
    return (Fraction(cu, n), Fraction(cv, n))


def of_mul(a, b):
    real = a.ctx.real
    rows = [list(real.f_mul(x, y)) for x in a.hnf for y in b.hnf]
    return OFIdeal(a.ctx, rows)


def of_intersect(a, b):
    rows = linalg.intersect_rowspans([list(r) for r in a.hnf], [list(r) for r in b.hnf])
    return OFIdeal(a.ctx, [[int(x) for x in row] for row in rows])


def of_pow(a, e):
    result = OFIdeal.unit(a.ctx)
    base = a
    while e:
        if e & 1:
            result = of_mul(result, base)
        base = of_mul(base, base)
        e >>= 1
    return result


def of_divides(p, a):
    """p | a for O_F ideals (containment: a inside p)."""
    H = [list(r) for r in p.hnf]
    return all(linalg.in_rowspan_int(H, list(row)) for row in a.hnf)


def of_generator(a, bound_start=None):
    """A generator of the principal O_F-ideal a, as an (u, v) pair over
    {1, w}.  Exists whenever the narrow class number is 1; the search is a
    growing short-vector enumeration bounded via the fundamental unit."""
    ctx = a.ctx
    real = ctx.real
    G0 = real.gram()
    H = [list(r) for r in a.hnf]
    G = linalg.mat_mul(linalg.mat_mul(H, G0), linalg.transpose(H))
    U, Gr = linalg.lll_reduce_gram(G)
    UH = linalg.mat_mul(U, H)
    n = a.norm
    # a balanced generator g has T2(g) <= n * (eps + 1/eps) <= n * (E + 1)
    E = (real.unit_u + real.unit_v * (math.isqrt(real.disc) + 1) + 1) // 2 + 1
    cap = 2 * n * (E + 1)
    bound = bound_start or max(min(Gr[0][0], Gr[1][1]), 4)
    while True:
        for coords, _ in linalg.enumerate_gram(Gr, bound):
            u, v = linalg.vec_mat(list(coords), UH)
            if abs(real.f_norm(u, v)) == n:
                return (u, v)
        if bound > cap:
            raise NotInvertible(f"no generator found for ideal of norm {n}")
        bound *= 2


def of_div_prime(a, p):
    """Quotient a / p for a prime p dividing a."""
    ctx = a.ctx
    lam = of_generator(p.ideal(ctx) if isinstance(p, RealPrime) else p)
    inv = f_inverse(ctx, lam)
    real = ctx.real
    rows = []
    for row in a.hnf:
        u = row[0] * inv[0] - row[1] * inv[1] * real.omega_norm
        v = row[0] * inv[1] + row[1] * inv[0] + row[1] * inv[1] * real.disc
        if u.denominator != 1 or v.denominator != 1:
            raise ValueError("prime does not divide the ideal")
        rows.append([int(u), int(v)])
    return OFIdeal(ctx, rows)


def of_valuation(a, p):
    """Valuation of a at the prime p (RealPrime or prime OFIdeal)."""
    ctx = a.ctx
    pid = p.ideal(ctx) if isinstance(p, RealPrime) else p
    v = 0
    cur = a
    while of_divides(pid, cur):
        cur = of_div_prime(cur, pid)
        v += 1
    return v


def of_factor(a, rho_seed=1):
    """Factor an integral O_F-ideal into [(RealPrime, exponent)]."""
    ctx = a.ctx
    if a.is_unit():
        return []
    fac = arith.factorint(a.norm, rho_seed)
    out = []
    check = 1
    for ell in sorted(fac):
        for P in real_primes_over(ctx, ell):
            e = of_valuation(a, P)
            if e:
                out.append((P, e))
                check *= P.norm ** e
    if check != a.norm:
        raise FactorizationFailure(f"lost norm while factoring: {check} != {a.norm}")
    return out


def of_equal_product(factors, ctx):
    acc = OFIdeal.unit(ctx)
    for P, e in factors:
        acc = of_mul(acc, of_pow(P.ideal(ctx), e))
    return acc


# ---------------------------------------------------------------------------
# Primes of orders in K


@dataclass(frozen=True)
class PrimeOverL:
    """Prime descriptor l*O + r(pi)*O, shared across the orders in play.

    rpoly is the monic irreducible factor of the Weil polynomial mod ell,
    low-to-high coefficients reduced into [0, ell).
    """

    ell: int
    rpoly: tuple
    owner_tag: str = "OFpi"

    @property
    def degree(self):
        return len(self.rpoly) - 1

    @property
    def norm(self):
        return self.ell ** self.degree

    def sort_key(self):
        return (self.norm, self.ell, self.rpoly)

    def r_at_pi(self, ctx):
        acc = ctx.coerce(0)
        pw = ctx.one
        for c in self.rpoly:
            acc = acc + pw * int(c)
            pw = pw * ctx.pi
        return acc

    def as_ideal(self, order):
        """Realize the descriptor as a KIdeal of the given order."""
        ctx = order.ctx
        rpi = order.int_coords_of(self.r_at_pi(ctx))
        if rpi is None:
            raise ValueError("r(pi) does not lie in the order")
        rows = [[self.ell if i == j else 0 for j in range(4)] for i in range(4)]
        table = order.mult_table
        for i in range(4):
            row = [0, 0, 0, 0]
            for j, c in enumerate(rpi):
                if c:
                    t = table[i][j]
                    for k in range(4):
                        row[k] += c * t[k]
            rows.append(row)
        ideal = KIdeal(order, rows)
        return ideal

    def conj_descriptor(self, ctx):
        """The conjugate prime: factor whose roots are q / (roots of rpoly)."""
        ell, q = self.ell, ctx.q
        r = list(self.rpoly)
        d = len(r) - 1
        s = [(r[d - k] * pow(q, d - k, ell)) % ell for k in range(d + 1)]
        lead_inv = pow(s[d], ell - 2, ell)
        s = tuple(c * lead_inv % ell for c in s)
        return PrimeOverL(ell, s, self.owner_tag)

    def is_self_conjugate(self, ctx):
        return self.conj_descriptor(ctx) == self


def primes_over(ctx, ell, undesirable, seed=0):
    """All PrimeOverL descriptors over an admissible rational prime."""
    if ell in undesirable:
        raise UndesirablePrime(f"{ell} divides an excluded index or conductor norm")
    _, facs = fppoly.factor(ctx.weil_poly(), ell, seed=seed)
    out = []
    for g, e in facs:
        out.append((PrimeOverL(ell, tuple(g)), e))
    out.sort(key=lambda pe: pe[0].sort_key())
    return out


def principal_by_structure(ctx, prime):
    """True for self-conjugate primes that are full lifts of real primes
    (inert in K over their real prime): those are principal in every order
    in play because the real prime is principal in O_F."""
    if prime.conj_descriptor(ctx) != prime:
        return False
    ell = prime.ell
    D = ctx.real.disc
    if D % ell == 0:
        f_below = 1
    else:
        f_below = 2 if arith.kronecker(D, ell) == -1 else 1
    return prime.degree == 2 * f_below


def undesirable_prime_set(ctx, OK, v_norm, rho_seed=1):
    """Rational primes excluded from factor bases: divisors of the two
    index gaps and of N(v), plus the residue characteristic."""
    from .orders import Order

    zpi = Order(ctx, linalg.identity_matrix(4), check=False)
    idx = zpi.index_in(OK)
    bad = {ctx.p}
    for n in (idx, ctx.real.gap, v_norm):
        if n > 1:
            bad.update(arith.factorint(n, rho_seed))
    return bad


# ---------------------------------------------------------------------------
# K-ideal operations


def kmul(a, b):
    if a.owner != b.owner:
        raise OwnerMismatch("ideal product across different orders")
    table = a.owner.mult_table
    rows = []
    for u in a.hnf:
        for v in b.hnf:
            row = [0, 0, 0, 0]
            for i, x in enumerate(u):
                if x:
                    for j, y in enumerate(v):
                        if y:
                            xy = x * y
                            t = table[i][j]
                            for k in range(4):
                                row[k] += xy * t[k]
            rows.append(row)
    return KIdeal(a.owner, rows)


def kpow(a, e):
    result = KIdeal.unit(a.owner)
    base = a
    while e:
        if e & 1:
            result = kmul(result, base)
        base = kmul(base, base)
        e >>= 1
    return result


def kconj(a):
    C = a.owner.conj_table
    rows = [linalg.vec_mat(list(row), C) for row in a.hnf]
    return KIdeal(a.owner, rows)


def k_from_prime_power(prime, e, order):
    return kpow(prime.as_ideal(order), e)


def k_scale_element(order, x, a):
    """The lattice x * a for a field element x; must stay integral."""
    rows = []
    for row in a.hnf:
        el = order.element(list(row)) * x
        v = order.int_coords_of(el)
        if v is None:
            return None
        rows.append(v)
    return KIdeal(order, rows)


def k_extend_of_ideal(order, f):
    """The extension f * order of an O_F-ideal."""
    rows = []
    for g in f.elements():
        for i in range(4):
            el = order.element([1 if j == i else 0 for j in range(4)]) * g
            v = order.int_coords_of(el)
            if v is None:
                raise ValueError("extension left the order")
            rows.append(v)
    return KIdeal(order, rows)


def k_contract_to_f(order, a):
    """The contraction a ^ O_F as an OFIdeal."""
    ctx = order.ctx
    B = [list(r) for r in order.basis]
    rows_power = [linalg.vec_mat(list(row), B) for row in a.hnf]
    fbasis = [list(ctx.one.coords), list(ctx.omega_elem.coords)]
    inter = linalg.intersect_rowspans(rows_power, fbasis)
    out = []
    for row in inter:
        fc = ctx.to_f_coords(FieldElem(ctx, row))
        assert fc is not None
        u, v = fc
        assert u.denominator == 1 and v.denominator == 1
        out.append([int(u), int(v)])
    return OFIdeal(ctx, out)


def k_valuation(a, prime_ideal):
    """Valuation of a at an invertible prime KIdeal, by containment in
    ascending powers."""
    if not prime_ideal.contains_ideal(a):
        return 0
    v = 1
    power = prime_ideal
    while True:
        power = kmul(power, prime_ideal)
        if not power.contains_ideal(a):
            return v
        v += 1


def relative_norm_ideal(order, a):
    """N_{K/F}(a) as an OFIdeal: (a * conj(a)) ^ O_F."""
    return k_contract_to_f(order, kmul(a, kconj(a)))


def t2_gram_of_ideal(a):
    H = [list(r) for r in a.hnf]
    return linalg.mat_mul(linalg.mat_mul(H, a.owner.t2_gram()), linalg.transpose(H))


def reduce_ideal(order, a, nu_pair=None):
    """Small ideal equivalent to a in the class group of its owner.

    Returns (b, witness) with b = witness * a as an exact lattice identity,
    witness in K, and N(b) <= disc(order)^2.  Raises NotInvertible when the
    rescaled lattice fails to be integral (ideal not invertible).

    nu_pair, when given, must be (u, v) coordinates over {1, w} of a
    generator of the relative norm N_{K/F}(a); callers that build a as a
    power product can supply it multiplicatively and skip the norm-ideal
    computation here.
    """
    if a.owner != order:
        raise OwnerMismatch("ideal does not belong to the order")
    if a.is_unit():
        return a, order.ctx.one
    abar = kconj(a)
    G = t2_gram_of_ideal(abar)
    coords, _ = linalg.shortest_vector_gram(G)
    w = order.element(linalg.vec_mat(list(coords), [list(r) for r in abar.hnf]))
    if nu_pair is None:
        nu_pair = of_generator(relative_norm_ideal(order, a))
    nu = order.ctx.from_f_coords(nu_pair[0], nu_pair[1])
    witness = w / nu
    b = k_scale_element(order, witness, a)
    if b is None:
        raise NotInvertible("reduction left the order; ideal is not invertible")
    assert b.norm <= order.disc * order.disc, "reduction bound violated"
    return b, witness


def k_principal_generator(order, a):
    """Exact principality decision: a generator g with (g) = a, or None.

    Any generator can be balanced across the two archimedean places by
    fundamental-unit multiples, so its T2 norm is at most
    2 sqrt(N) (eps^2 + eps^-2); enumerating up to that exact cap and
    checking |Norm| = N(a) plus the lattice equality decides principality
    unconditionally (given O_K^* = O_F^*, one of the driver requirements).
    """
    ctx = order.ctx
    real = ctx.real
    H = [list(r) for r in a.hnf]
    G = linalg.mat_mul(linalg.mat_mul(H, order.t2_gram()), linalg.transpose(H))
    U, Gr = linalg.lll_reduce_gram(G)
    UH = linalg.mat_mul(U, H)
    n = a.norm
    E = (real.unit_u + real.unit_v * (math.isqrt(real.disc) + 1) + 1) // 2 + 1
    cap = 2 * (math.isqrt(n) + 1) * (E * E + 1)
    bound = min(Gr[i][i] for i in range(4))
    while True:
        for coords, _val in linalg.enumerate_gram(Gr, bound):
            g = order.element(linalg.vec_mat(list(coords), UH))
            if abs(g.norm()) == n:
                gen = _principal_k_ideal(order, g)
                if gen == a:
                    return g
        if bound >= cap:
            return None
        bound = min(bound * 4, cap)


def _principal_k_ideal(order, x):
    rows = []
    for i in range(4):
        e = order.element([1 if j == i else 0 for j in range(4)]) * x
        v = order.int_coords_of(e)
        assert v is not None, "element outside its order"
        rows.append(v)
    return KIdeal(order, rows)


# ---------------------------------------------------------------------------
# Splitting in O_K for arbitrary primes (used by the splitting symbol)


def _algebra_mod_l(order, ell):
    table = order.mult_table
    one = [c % ell for c in order.int_coords_of(order.ctx.one)]

    def mul(x, y):
        out = [0, 0, 0, 0]
        for i, c in enumerate(x):
            if c:
                for j, d in enumerate(y):
                    if d:
                        cd = c * d % ell
                        t = table[i][j]
                        for k in range(4):
                            out[k] = (out[k] + cd * t[k]) % ell
        return out

    return one, mul


def maximal_ideals_mod_l(order, ell, seed=0):
    """Maximal ideals of order/(ell), each as (KIdeal, residue_degree).

    Works for any ell (incl. index divisors): strips the nilradical via the
    Frobenius kernel, then splits the semisimple quotient with minimal
    polynomials of successive elements.
    """
    from .orders import _p_radical

    ctx = order.ctx
    rad_rows = _p_radical(order, ell)
    H, _ = linalg.hnf_rows_frac(rad_rows)
    rad = KIdeal(order, [order.int_coords_of(FieldElem(ctx, row)) for row in H])
    one, mul = _algebra_mod_l(order, ell)

    # maximal ideals containing rad = preimages of maximal ideals of the
    # semisimple A/rad; find them by factoring minimal polynomials
    found = []
    stack = [rad]
    import random as _random

    rng = _random.Random(seed)
    while stack:
        I = stack.pop()
        # quotient dimension: pivots of I divide ell, so count the ell's
        dim = sum(1 for i in range(4) if I.hnf[i][i] == ell)
        if dim == 0:
            continue
        # try to split A/I with the minimal polynomial of an element
        split = False
        for attempt in range(40):
            if attempt < 4:
                x = [1 if i == attempt else 0 for i in range(4)]
            else:
                x = [rng.randrange(ell) for _ in range(4)]
            minpoly = _minpoly_mod(x, I, one, mul, ell)
            _, facs = fppoly.factor(minpoly, ell, seed=seed + attempt)
            if len(facs) == 1 and facs[0][1] == 1:
                if len(facs[0][0]) - 1 == dim:
                    found.append((I, dim))
                    split = True
                    break
                continue
            # proper factor g: I + g(x) is a bigger ideal
            for g, _e in facs:
                gx = _eval_poly_alg(g, x, one, mul, ell)
                rows = [list(r) for r in I.hnf]
                table = order.mult_table
                for i in range(4):
                    row = [0, 0, 0, 0]
                    for j, c in enumerate(gx):
                        if c:
                            t = table[i][j]
                            for k in range(4):
                                row[k] = row[k] + c * t[k]
                    rows.append(row)
                J = KIdeal(order, rows)
                if J.hnf != I.hnf:
                    stack.append(J)
            split = True
            break
        if not split:
            raise FactorizationFailure("could not split the residue algebra")
    # dedupe
    uniq = {}
    for I, d in found:
        uniq[I.hnf] = (I, d)
    return sorted(uniq.values(), key=lambda t: (t[1], t[0].hnf))


def _minpoly_mod(x, I, one, mul, ell):
    """Minimal polynomial of the image of x in order/I over GF(ell).

    The pivots of I all divide ell, so HNF reduction gives canonical coset
    representatives supported on the pivot-ell coordinates; dependencies
    among those representatives are honest GF(ell) linear algebra.
    """
    H = [list(r) for r in I.hnf]
    raws = [list(one)]
    reduced = [_reduce_mod_ideal(raws[0], H, ell)]
    for k in range(1, 6):
        raws.append(mul(raws[-1], x))
        reduced.append(_reduce_mod_ideal(raws[-1], H, ell))
        aug = [reduced[i] + [1 if j == i else 0 for j in range(k + 1)] for i in range(k + 1)]
        for dep in _kernel_gf(aug, 4, ell):
            if dep[k] % ell:
                inv = pow(dep[k], ell - 2, ell)
                return [c * inv % ell for c in dep]
    raise AssertionError("no minimal polynomial found")


def _reduce_mod_ideal(vec, H, ell):
    v = [c % ell for c in vec]
    # reduce with the HNF rows of the ideal, then mod ell
    pivots = linalg.hnf_pivots(H)
    w = list(vec)
    for row, j in zip(H, pivots):
        q = w[j] // row[j]
        if q:
            for k in range(j, 4):
                w[k] -= q * row[k]
    return [c % ell for c in w]


def _kernel_gf(aug_rows, ncols, ell):
    """Left-kernel rows of the first ncols columns, from augmented rows."""
    m = len(aug_rows)
    A = [list(r) for r in aug_rows]
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, m) if A[i][col] % ell), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][col], ell - 2, ell)
        A[r] = [x * inv % ell for x in A[r]]
        for i in range(m):
            if i != r and A[i][col] % ell:
                f = A[i][col]
                A[i] = [(x - f * y) % ell for x, y in zip(A[i], A[r])]
        r += 1
    out = []
    for i in range(r, m):
        if all(A[i][j] % ell == 0 for j in range(ncols)):
            out.append(A[i][ncols:])
    return out


def _eval_poly_alg(g, x, one, mul, ell):
    acc = [0, 0, 0, 0]
    for c in reversed(g):
        acc = mul(acc, x)
        if c:
            for k in range(4):
                acc[k] = (acc[k] + c * one[k]) % ell
    return acc


def split_symbol(ctx, OK, l):
    """+1, 0 or -1 as the real prime l is split, ramified or inert in K."""
    prims = maximal_ideals_mod_l(OK, l.ell)
    over_l = []
    lid = l.ideal(ctx)
    for P, deg in prims:
        below = k_contract_to_f(OK, P)
        if below.hnf == lid.hnf:
            over_l.append((P, deg))
    if len(over_l) == 2:
        return 1
    if len(over_l) != 1:
        raise AssertionError(f"unexpected splitting over {l}")
    P, deg = over_l[0]
    if deg == l.residue_degree:
        return 0  # residue field did not grow: ramified
    return -1
