"""Quartic CM-field context built from a Weil polynomial.

A context fixes K = QQ[t]/(f) for f(t) = t^4 + a1 t^3 + a2 t^2 + a1 q t + q^2,
with the power basis {1, pi, pi^2, pi^3}.  Field elements carry exact rational
coordinates in that basis.  Complex conjugation is the automorphism sending
pi to q/pi; it fixes the real quadratic subfield F = QQ(s), s = pi + q/pi,
pointwise.  The context also packages exact data for F: the fundamental
discriminant, the maximal-order generator w = (D + sqrt(D))/2, the index of
Z[s] in O_F, the fundamental unit, and the narrow class number computed from
cycles of reduced indefinite binary quadratic forms.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from . import arith
from .errors import NotOrdinary, NotPrimePower, NotWeil, ReduciblePolynomial


def sign_plus_sqrt(u, v, n):
    """Exact sign of u + v*sqrt(n) for integers/fractions u, v and n >= 0."""
    if v == 0:
        return (u > 0) - (u < 0)
    if u == 0:
        return (v > 0) - (v < 0)
    if u > 0 and v > 0:
        return 1
    if u < 0 and v < 0:
        return -1
    # opposite signs: compare u^2 with v^2 * n
    lhs, rhs = u * u, v * v * n
    if lhs == rhs:
        return 0
    bigger_u = lhs > rhs
    return (1 if bigger_u else -1) * ((u > 0) - (u < 0))


def _divisors(n):
    fac = arith.factorint(n)
    divs = [1]
    for p, e in fac.items():
        divs = [d * p ** k for d in divs for k in range(e + 1)]
    return sorted(divs)


def quartic_is_irreducible(a1, a2, a3, a4):
    """Irreducibility over QQ of t^4 + a1 t^3 + a2 t^2 + a3 t + a4.

    Rational-root exclusion plus an exact search for integer quadratic
    factors (t^2 + u t + v)(t^2 + w t + z) with v z = a4.
    """
    if a4 == 0:
        return False
    for d in _divisors(abs(a4)):
        for r in (d, -d):
            if ((r * r + a1 * r + a2) * r + a3) * r + a4 == 0:
                return False
    for v in _divisors(abs(a4)):
        for sv in (v, -v):
            if a4 % sv != 0:
                continue
            z = a4 // sv
            # u + w = a1, u z + w v = a3, v + z + u w = a2
            if z != sv:
                num = a3 - a1 * sv
                if num % (z - sv) != 0:
                    continue
                u = num // (z - sv)
                w = a1 - u
                if sv + z + u * w == a2:
                    return False
            else:
                # z == v: need u + w = a1 and v(u + w) = a3
                if sv * a1 != a3:
                    continue
                # u w = a2 - 2v with u + w = a1
                disc = a1 * a1 - 4 * (a2 - 2 * sv)
                if disc >= 0 and arith.isqrt_exact(disc) is not None:
                    return False
    return True


def newton_power_sums(a1, a2, a3, a4, count):
    """Power sums of the roots of t^4 + a1 t^3 + a2 t^2 + a3 t + a4."""
    s1, s2, s3, s4 = -a1, a2, -a3, a4
    p = [4]
    for k in range(1, count):
        if k == 1:
            p.append(s1)
        elif k == 2:
            p.append(s1 * p[1] - 2 * s2)
        elif k == 3:
            p.append(s1 * p[2] - s2 * p[1] + 3 * s3)
        elif k == 4:
            p.append(s1 * p[3] - s2 * p[2] + s3 * p[1] - 4 * s4)
        else:
            p.append(s1 * p[k - 1] - s2 * p[k - 2] + s3 * p[k - 3] - s4 * p[k - 4])
    return p


class FieldElem:
    """Element of K in the power basis, exact rational coordinates."""

    __slots__ = ("ctx", "coords")

    def __init__(self, ctx, coords):
        self.ctx = ctx
        self.coords = tuple(Fraction(c) for c in coords)

    def __add__(self, other):
        other = self.ctx.coerce(other)
        return FieldElem(self.ctx, [a + b for a, b in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __sub__(self, other):
        other = self.ctx.coerce(other)
        return FieldElem(self.ctx, [a - b for a, b in zip(self.coords, other.coords)])

    def __rsub__(self, other):
        return self.ctx.coerce(other) - self

    def __neg__(self):
        return FieldElem(self.ctx, [-a for a in self.coords])

    def __mul__(self, other):
        other = self.ctx.coerce(other)
        table = self.ctx.power_table
        out = [Fraction(0)] * 4
        for i, a in enumerate(self.coords):
            if a == 0:
                continue
            for j, b in enumerate(other.coords):
                if b == 0:
                    continue
                ab = a * b
                row = table[i][j]
                for k in range(4):
                    if row[k]:
                        out[k] += ab * row[k]
        return FieldElem(self.ctx, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self.ctx.coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.ctx.coerce(other) * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ctx.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, FieldElem):
            try:
                other = self.ctx.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def mul_matrix(self):
        """Rows i = coordinates of pi^i * self."""
        basis_pow = [self.ctx.one, self.ctx.pi, self.ctx.pi2, self.ctx.pi3]
        return [list((b * self).coords) for b in basis_pow]

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in K")
        from .linalg import mat_inv

        M = self.mul_matrix()
        inv = mat_inv(M)
        # solve z * M = e0  =>  z = e0 * M^{-1} (first row of M^{-1})
        return FieldElem(self.ctx, inv[0])

    def trace(self):
        return sum(c * p for c, p in zip(self.coords, self.ctx.trace_powers))

    def norm(self):
        from .linalg import det_frac

        return det_frac(self.mul_matrix())

    def conj(self):
        from .linalg import vec_mat

        return FieldElem(self.ctx, vec_mat(list(self.coords), self.ctx.conj_matrix))

    def __repr__(self):
        names = ["", "*pi", "*pi^2", "*pi^3"]
        parts = [f"{c}{n}" for c, n in zip(self.coords, names) if c != 0]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class RealSubfield:
    """Exact data for F = QQ(s), s = pi + q/pi."""

    b: int                 # s^2 + b s + c = 0
    c: int
    disc_zs: int           # b^2 - 4c = disc of Z[s]
    disc: int              # fundamental discriminant of F
    gap: int               # index [O_F : Z[s]]
    unit_u: int            # fundamental unit (u + v sqrt(disc))/2
    unit_v: int
    unit_norm: int
    narrow_h: int          # narrow class number of O_F

    @property
    def omega_norm(self):
        # w = (D + sqrt(D))/2 has w^2 = D w - D(D-1)/4
        return self.disc * (self.disc - 1) // 4

    def f_norm(self, u, v):
        """Norm of u + v*w over QQ (w = (D + sqrt D)/2)."""
        return u * u + u * v * self.disc + v * v * self.omega_norm

    def f_trace(self, u, v):
        return 2 * u + v * self.disc

    def f_mul(self, x, y):
        """Product of (u1 + v1 w)(u2 + v2 w) in coordinates over {1, w}."""
        u1, v1 = x
        u2, v2 = y
        # w^2 = D w - D(D-1)/4
        return (
            u1 * u2 - v1 * v2 * self.omega_norm,
            u1 * v2 + u2 * v1 + v1 * v2 * self.disc,
        )

    def f_conj(self, x):
        """Nontrivial automorphism of F: w -> D - w."""
        u, v = x
        return (u + v * self.disc, -v)

    def gram(self):
        """Trace form Tr(x y) over the basis {1, w} (Minkowski T2 on F)."""
        D = self.disc
        return [[2, D], [D, D * (D + 1) // 2]]


def continued_fraction_pell(n):
    """Fundamental solution of x^2 - n y^2 = +-1 via the CF of sqrt(n).

    Returns (x, y, norm).  n must be a positive nonsquare.
    """
    a0 = math.isqrt(n)
    if a0 * a0 == n:
        raise ValueError("n is a perfect square")
    p_prev, p_cur = 1, a0
    q_prev, q_cur = 0, 1
    P, Q = 0, 1
    a = a0
    k = 0
    while True:
        P = a * Q - P
        Q = (n - P * P) // Q
        a = (a0 + P) // Q
        k += 1
        if Q == 1:
            # end of period: convergent p_cur/q_cur solves x^2 - n y^2 = (-1)^k
            return p_cur, q_cur, (-1) ** k
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev


def fundamental_unit(D):
    """Fundamental unit (u + v sqrt(D))/2 of the real quadratic order of
    fundamental discriminant D, with its norm.  Returns (u, v, norm)."""
    if D % 4 == 0:
        m = D // 4
        x, y, nrm = continued_fraction_pell(m)
        return 2 * x, 2 * y, nrm
    # D odd: CF over Z[sqrt(D)] gives eta = eps or eps^3
    x, y, nrm = continued_fraction_pell(D)
    # look for eps = (u + v sqrt(D))/2 with eps^3 = x + y sqrt(D):
    # 8x = u(u^2 + 3 D v^2), 8y = v(3 u^2 + D v^2)
    for v in _divisors(8 * y):
        if D * v ** 3 > 8 * y:
            break
        rem = 8 * y // v - D * v * v
        if rem <= 0 or rem % 3:
            continue
        u = arith.isqrt_exact(rem // 3)
        if u is None or (u - v) % 2:
            continue
        if u * (u * u + 3 * D * v * v) == 8 * x and (u * u - D * v * v) in (4, -4):
            return u, v, (u * u - D * v * v) // 4
    return 2 * x, 2 * y, nrm


def _reduced_indefinite_forms(D):
    """All reduced primitive indefinite forms (a, b, c) of discriminant D."""
    forms = []
    sq = math.isqrt(D)
    for b in range(1, sq + 1):
        if (D - b * b) % 4 != 0:
            continue
        ac = (b * b - D) // 4  # < 0
        for a in range(1, sq + 1):
            if ac % a != 0:
                continue
            c = ac // a
            for aa, cc in ((a, c), (-a, -c)):
                if math.gcd(math.gcd(abs(aa), b), abs(cc)) != 1:
                    continue
                if _reduced_check(aa, b, cc, D):
                    forms.append((aa, b, cc))
    return sorted(set(forms))


def _reduced_check(a, b, c, D):
    # |sqrt(D) - 2|a|| < b < sqrt(D), exact
    if sign_plus_sqrt(-b, 1, D) <= 0:  # need b < sqrt(D)
        return False
    t = 2 * abs(a)
    # need -b < sqrt(D) - t < b
    return sign_plus_sqrt(b - t, 1, D) > 0 and sign_plus_sqrt(-b - t, 1, D) < 0


def _rho(form, D):
    """Reduction step on indefinite forms: (a,b,c) -> (c, b', c') with
    b' = -b mod 2|c| placed in the window (sqrt(D) - 2|c|, sqrt(D))."""
    _, b, c = form
    t = 2 * abs(c)
    bp = (-b) % t
    while sign_plus_sqrt(-(bp + t), 1, D) > 0:  # bp + t < sqrt(D): shift up
        bp += t
    if sign_plus_sqrt(-bp, 1, D) <= 0:  # bp > sqrt(D): step down once
        bp -= t
    cp = (bp * bp - D) // (4 * c)
    return (c, bp, cp)


def narrow_class_number(D):
    """Narrow class number of the real quadratic order of discriminant D,
    counted as rho-cycles of reduced indefinite forms."""
    forms = set(_reduced_indefinite_forms(D))
    cycles = 0
    seen = set()
    for f in sorted(forms):
        if f in seen:
            continue
        cycles += 1
        g = f
        while True:
            seen.add(g)
            g = _rho(g, D)
            if g == f:
                break
            if g in seen and g != f:
                # landed in an already-seen cycle; rho is a permutation on
                # reduced forms so this cannot happen from a fresh start
                break
    return cycles


@dataclass(frozen=True)
class RequirementsReport:
    ordinary: bool
    irreducible: bool
    units_equal: bool
    narrow_class_one: bool
    odd_conductor_gap: bool
    messages: tuple

    def all_ok(self):
        return (
            self.ordinary
            and self.irreducible
            and self.units_equal
            and self.narrow_class_one
            and self.odd_conductor_gap
        )


class WeilContext:
    """Exact arithmetic context for K = QQ(pi); see the module docstring."""

    def __init__(self, q, p, n, a1, a2):
        self.q = q
        self.p = p
        self.n = n
        self.a1 = a1
        self.a2 = a2
        self.a3 = a1 * q
        self.a4 = q * q
        self._build_tables()
        self._build_real_subfield()

    # -- construction ------------------------------------------------------

    def _build_tables(self):
        a1, a2, a3, a4 = self.a1, self.a2, self.a3, self.a4
        # powers of pi up to pi^6 as integer coordinate vectors
        powers = [[0] * 4 for _ in range(7)]
        for i in range(4):
            powers[i][i] = 1
        for i in range(4, 7):
            prev = powers[i - 1]
            shifted = [0] + prev[:3]
            overflow = prev[3]
            red = [shifted[k] - overflow * coef for k, coef in enumerate((a4, a3, a2, a1))]
            powers[i] = red
        self.pi_powers = powers
        self.power_table = [[powers[i + j] for j in range(4)] for i in range(4)]
        self.trace_powers = newton_power_sums(a1, a2, a3, a4, 7)
        self.one = FieldElem(self, [1, 0, 0, 0])
        self.pi = FieldElem(self, [0, 1, 0, 0])
        self.pi2 = FieldElem(self, [0, 0, 1, 0])
        self.pi3 = FieldElem(self, [0, 0, 0, 1])
        # conjugation: pi -> q/pi = -(pi^3 + a1 pi^2 + a2 pi + a1 q)/q
        q = self.q
        pibar = FieldElem(self, [Fraction(-a1), Fraction(-a2, q), Fraction(-a1, q), Fraction(-1, q)])
        self.pibar = pibar
        rows = [list(self.one.coords)]
        cur = self.one
        for _ in range(3):
            cur = cur * pibar
            rows.append(list(cur.coords))
        self.conj_matrix = rows
        # Hermitian trace form Theta[i][j] = Tr(pi^i * conj(pi^j))
        basis = [self.one, self.pi, self.pi2, self.pi3]
        conj_basis = [b.conj() for b in basis]
        self.theta = [[(basis[i] * conj_basis[j]).trace() for j in range(4)] for i in range(4)]
        # plain trace form (for discriminants)
        self.trace_form = [[self.trace_powers[i + j] for j in range(4)] for i in range(4)]

    def _build_real_subfield(self):
        b, c = self.a1, self.a2 - 2 * self.q
        d0 = b * b - 4 * c
        g, m = arith.squarefree_decompose(d0)
        if m % 4 == 1:
            D, gap = m, g
        else:
            D, gap = 4 * m, g // 2
        u, v, nrm = fundamental_unit(D)
        hplus = narrow_class_number(D)
        self.real = RealSubfield(
            b=b, c=c, disc_zs=d0, disc=D, gap=gap, unit_u=u, unit_v=v, unit_norm=nrm, narrow_h=hplus
        )
        # s = pi + pibar, sqrt(D) = (2s + b)/gap, w = (D + sqrt(D))/2
        self.s_elem = self.pi + self.pibar
        self.sqrtD_elem = (2 * self.s_elem + self.one * b) / gap
        self.omega_elem = (self.one * self.real.disc + self.sqrtD_elem) / 2

    # -- element helpers ----------------------------------------------------

    def coerce(self, x):
        if isinstance(x, FieldElem):
            if x.ctx is not self:
                raise ValueError("element from a different context")
            return x
        if isinstance(x, (int, Fraction)):
            return FieldElem(self, [x, 0, 0, 0])
        raise TypeError(f"cannot coerce {x!r} into K")

    def elem(self, coords):
        return FieldElem(self, coords)

    def from_f_coords(self, u, v):
        """Element u + v*w of F inside K."""
        return self.one * u + self.omega_elem * v

    def to_f_coords(self, x):
        """Write x in F as (u, v) over {1, w}; None if x is not in F."""
        w = self.omega_elem.coords
        # solve u*(1,0,0,0) + v*w = x in the power basis
        if w[1] == 0 and w[2] == 0 and w[3] == 0:
            raise ValueError("degenerate context")
        # pick a coordinate where w is nonzero beyond the constant
        for k in (1, 2, 3):
            if w[k] != 0:
                v = x.coords[k] / w[k]
                break
        u = x.coords[0] - v * w[0]
        if self.from_f_coords(u, v) == x:
            return (u, v)
        return None

    def weil_poly(self):
        return [self.a4, self.a3, self.a2, self.a1, 1]

    def __repr__(self):
        return f"WeilContext(q={self.q}, a1={self.a1}, a2={self.a2})"

    def __eq__(self, other):
        return (
            isinstance(other, WeilContext)
            and (self.q, self.a1, self.a2) == (other.q, other.a1, other.a2)
        )

    def __hash__(self):
        return hash((self.q, self.a1, self.a2))


def build_weil_context(q, a1, a2):
    """Validate (q, a1, a2) and build the context.

    Raises NotPrimePower, ReduciblePolynomial, NotWeil or NotOrdinary.
    """
    p, n = arith.prime_power_decompose(q)
    a3, a4 = a1 * q, q * q
    if not quartic_is_irreducible(a1, a2, a3, a4):
        raise ReduciblePolynomial(f"t^4+{a1}t^3+{a2}t^2+{a3}t+{a4} is reducible over QQ")
    b, c = a1, a2 - 2 * q
    d0 = b * b - 4 * c
    if d0 <= 0:
        raise NotWeil("pi + q/pi is not real quadratic; some root is off |z| = sqrt(q)")
    # both roots of t^2 + b t + c must lie strictly inside (-2 sqrt(q), 2 sqrt(q))
    if sign_plus_sqrt(4 * q + c, 2 * b, q) <= 0 or sign_plus_sqrt(4 * q + c, -2 * b, q) <= 0:
        raise NotWeil("a root of the real minimal polynomial falls outside (-2 sqrt q, 2 sqrt q)")
    if sign_plus_sqrt(-abs(b), 4, q) <= 0:
        raise NotWeil("vertex of the real minimal polynomial outside the Weil window")
    if a2 % p == 0:
        raise NotOrdinary(f"p = {p} divides a2 = {a2}")
    return WeilContext(q, p, n, a1, a2)


def conjugate(ctx, x):
    """Image of x under the automorphism of K/F with pi -> q/pi."""
    return ctx.coerce(x).conj()


def validate_requirements(ctx, class_number_cap=None):
    """Check the four verifiable hypotheses the drivers rely on.

    Reports rather than raises.  Absolute simplicity is asserted by the
    caller and only flagged in the messages.
    """
    messages = ["absolute simplicity is asserted by the user, not verified"]
    ordinary = ctx.a2 % ctx.p != 0
    irreducible = True  # enforced at construction
    real = ctx.real
    narrow_one = real.narrow_h == 1
    if not narrow_one:
        messages.append(f"narrow class number of F is {real.narrow_h}, not 1")
    odd_gap = real.gap % 2 == 1
    if not odd_gap:
        messages.append(f"conductor gap [O_F : Z[s]] = {real.gap} is even")
    units_equal, unit_msg = _units_equal(ctx)
    if unit_msg:
        messages.append(unit_msg)
    return RequirementsReport(
        ordinary=ordinary,
        irreducible=irreducible,
        units_equal=units_equal,
        narrow_class_one=narrow_one,
        odd_conductor_gap=odd_gap,
        messages=tuple(messages),
    )


def _units_equal(ctx):
    """True unless K contains a fifth root of unity (K isomorphic to the
    fifth cyclotomic field is the only quartic CM exception)."""
    from .linalg import enumerate_gram
    from .orders import maximal_order

    if ctx.real.disc != 5:
        return True, None
    OK = maximal_order(ctx)
    if abs(OK.disc) != 125:
        return True, None
    # disc 125 over QQ(sqrt 5): hunt for zeta_5 among elements of T2 norm 4
    gram = OK.t2_gram()
    for coords, val in enumerate_gram(gram, 4):
        if val != 4:
            continue
        x = OK.element(list(coords))
        if (x ** 4 + x ** 3 + x ** 2 + x + 1).is_zero():
            return False, "K contains a primitive fifth root of unity (cyclotomic case)"
    return True, None
