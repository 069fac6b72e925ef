"""Orders and ideals as exact lattices.

An Order is a full-rank ring lattice in K, stored as the canonical rational
HNF basis in the power-basis coordinates of pi.  Ideals are integer HNF
matrices over their owner's basis:

  * OFIdeal: rank-2 integer HNF over the fixed basis {1, w} of O_F,
    w = (D + sqrt(D))/2.
  * KIdeal: rank-4 integer HNF over the owner order's basis.

The canonical HNF makes equality of lattices equality of matrices.

The maximal order comes from the standard Round-2 saturation loop: at every
prime whose square divides disc(Z[pi]), enlarge by the ring of multipliers
of the p-radical until stable.  The identifying ideal of an order O with
O ^ F = O_F follows the stacked multiplication-matrix construction: build
the rational matrix M from alpha_i * omega_j expanded over a basis of O,
clear denominators with d, take the row HNF H, and read the ideal basis off
the columns of d * H^{-1} (integrality of d * H^{-1} is asserted, not
assumed).
"""

import math
from fractions import Fraction

from . import arith, linalg
from .errors import NotRMOrder, NotSubring
from .field_core import FieldElem


def hnf_rows(rows):
    """Canonical row HNF of a rational or integer matrix: (H, rank).

    Positive pivots, entries above each pivot reduced into [0, pivot),
    zero rows removed.  Integer input gives integer output; rational input
    is canonicalized by clearing the common denominator and scaling back.
    """
    if not rows:
        return [], 0
    if all(isinstance(x, int) for row in rows for x in row):
        return linalg.hnf_rows_int(rows)
    return linalg.hnf_rows_frac(rows)


class Order:
    """Full-rank ring lattice in K, canonical basis, exact discriminant."""

    def __init__(self, ctx, basis_rows, check=True):
        self.ctx = ctx
        H, r = linalg.hnf_rows_frac(basis_rows)
        if r != 4:
            raise ValueError("order basis does not have full rank")
        self.basis = tuple(tuple(row) for row in H)
        self._inv = None
        self._mult = None
        self._conj = None
        self._gram = None
        gram = [[sum(self.basis[i][a] * self.basis[j][b] * ctx.trace_form[a][b]
                     for a in range(4) for b in range(4)) for j in range(4)] for i in range(4)]
        disc = linalg.det_frac(gram)
        if disc.denominator != 1:
            raise ValueError("discriminant is not an integer; basis is not integral")
        self.disc = int(disc)
        if check:
            self._check_ring()

    # -- identity and containment -------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Order) and self.ctx == other.ctx and self.basis == other.basis

    def __hash__(self):
        return hash((self.ctx, self.basis))

    def __repr__(self):
        return f"Order(disc={self.disc})"

    def key(self):
        """Stable tuple key for caches and sorting."""
        d, rows = linalg.scale_to_int([list(r) for r in self.basis])
        return (d, tuple(tuple(row) for row in rows))

    def contains_element(self, x):
        return linalg.lattice_contains_frac([list(r) for r in self.basis], list(x.coords))

    def contains_order(self, other):
        return all(
            linalg.lattice_contains_frac([list(r) for r in self.basis], list(row))
            for row in other.basis
        )

    def index_in(self, larger):
        """[larger : self] for self a sublattice of larger."""
        ratio = linalg.det_frac([list(r) for r in self.basis]) / linalg.det_frac(
            [list(r) for r in larger.basis]
        )
        ratio = abs(ratio)
        if ratio.denominator != 1:
            raise NotSubring("not a sublattice")
        return int(ratio)

    def _check_ring(self):
        if not self.contains_element(self.ctx.one):
            raise ValueError("lattice does not contain 1")
        be = self.basis_elements()
        for i in range(4):
            for j in range(i, 4):
                if not self.contains_element(be[i] * be[j]):
                    raise ValueError("lattice is not multiplicatively closed")

    # -- cached coordinate machinery ----------------------------------------

    def basis_elements(self):
        return [FieldElem(self.ctx, row) for row in self.basis]

    @property
    def inv_basis(self):
        if self._inv is None:
            self._inv = linalg.mat_inv([list(r) for r in self.basis])
        return self._inv

    def coords_of(self, x):
        """Coordinates of a field element over this order's basis."""
        return linalg.vec_mat(list(x.coords), self.inv_basis)

    def int_coords_of(self, x):
        v = self.coords_of(x)
        out = []
        for c in v:
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    return None
                out.append(int(c))
            else:
                out.append(int(c))
        return out

    def element(self, coords):
        """Field element with the given coordinates over this basis."""
        acc = [Fraction(0)] * 4
        for c, row in zip(coords, self.basis):
            if c:
                for k in range(4):
                    acc[k] += c * row[k]
        return FieldElem(self.ctx, acc)

    @property
    def mult_table(self):
        """Integer structure constants over this basis (closure certified)."""
        if self._mult is None:
            be = self.basis_elements()
            table = []
            for i in range(4):
                row = []
                for j in range(4):
                    v = self.int_coords_of(be[i] * be[j])
                    if v is None:
                        raise ValueError("basis products not integral; not an order")
                    row.append(v)
                table.append(row)
            self._mult = table
        return self._mult

    @property
    def conj_table(self):
        """Integer matrix of complex conjugation over this basis (rows =
        coordinates of conj(basis_i)); requires a conjugation-stable order."""
        if self._conj is None:
            rows = []
            for b in self.basis_elements():
                v = self.int_coords_of(b.conj())
                if v is None:
                    raise ValueError("order is not stable under conjugation")
                rows.append(v)
            self._conj = rows
        return self._conj

    def t2_gram(self):
        """Integer Gram matrix Tr(b_i * conj(b_j)) of the T2 form."""
        if self._gram is None:
            be = self.basis_elements()
            cj = [b.conj() for b in be]
            g = []
            for i in range(4):
                row = []
                for j in range(4):
                    t = (be[i] * cj[j]).trace()
                    if isinstance(t, Fraction):
                        if t.denominator != 1:
                            raise ValueError("T2 Gram not integral")
                        t = int(t)
                    row.append(int(t))
                g.append(row)
            self._gram = g
        return self._gram

    def pi_coords(self):
        v = self.int_coords_of(self.ctx.pi)
        if v is None:
            raise ValueError("order does not contain pi")
        return v


class RealOrder:
    """The maximal order O_F of F, over the basis {1, s} with s = pi + q/pi."""

    def __init__(self, ctx):
        self.ctx = ctx
        real = ctx.real
        # w = (D*gap + b)/(2*gap) + (1/gap) s
        self.basis = (
            (Fraction(1), Fraction(0)),
            (Fraction(real.disc * real.gap + real.b, 2 * real.gap), Fraction(1, real.gap)),
        )
        self.disc = real.disc

    def basis_elements(self):
        return [self.ctx.one, self.ctx.omega_elem]

    def __repr__(self):
        return f"RealOrder(disc={self.disc})"

    def __eq__(self, other):
        return isinstance(other, RealOrder) and self.ctx == other.ctx

    def __hash__(self):
        return hash(("RealOrder", self.ctx))


class OFIdeal:
    """Nonzero integral ideal of O_F: 2x2 integer HNF over {1, w}."""

    __slots__ = ("ctx", "hnf", "norm")

    def __init__(self, ctx, rows):
        H, r = linalg.hnf_rows_int(rows)
        if r != 2:
            raise ValueError("F-ideal lattice must have rank 2")
        self.ctx = ctx
        self.hnf = tuple(tuple(row) for row in H)
        self.norm = H[0][0] * H[1][1]

    @classmethod
    def unit(cls, ctx):
        return cls(ctx, [[1, 0], [0, 1]])

    @classmethod
    def from_generators(cls, ctx, gens):
        """Ideal generated by F-elements given as (u, v) pairs over {1, w}."""
        real = ctx.real
        rows = []
        for g in gens:
            rows.append(list(g))
            rows.append(list(real.f_mul(g, (0, 1))))
        return cls(ctx, rows)

    def is_unit(self):
        return self.hnf == ((1, 0), (0, 1))

    def generator_rows(self):
        return [list(r) for r in self.hnf]

    def elements(self):
        """The two basis elements as elements of K."""
        return [self.ctx.from_f_coords(u, v) for u, v in self.hnf]

    def __eq__(self, other):
        return isinstance(other, OFIdeal) and self.ctx == other.ctx and self.hnf == other.hnf

    def __hash__(self):
        return hash((self.ctx, self.hnf))

    def __repr__(self):
        return f"OFIdeal(norm={self.norm}, hnf={[list(r) for r in self.hnf]})"


class KIdeal:
    """Nonzero integral ideal of an order in K: 4x4 integer HNF over the
    owner's basis."""

    __slots__ = ("owner", "hnf", "norm")

    def __init__(self, owner, rows):
        H, r = linalg.hnf_rows_int(rows)
        if r != 4:
            raise ValueError("K-ideal lattice must have rank 4")
        self.owner = owner
        self.hnf = tuple(tuple(row) for row in H)
        n = 1
        for i in range(4):
            n *= H[i][i]
        self.norm = n

    @classmethod
    def unit(cls, owner):
        return cls(owner, linalg.identity_matrix(4))

    def is_unit(self):
        return self.norm == 1

    def basis_elements(self):
        return [self.owner.element(list(row)) for row in self.hnf]

    def contains(self, coords):
        return linalg.in_rowspan_int([list(r) for r in self.hnf], list(coords))

    def contains_ideal(self, other):
        assert other.owner == self.owner
        return all(self.contains(row) for row in other.hnf)

    def __eq__(self, other):
        return (
            isinstance(other, KIdeal)
            and self.owner == other.owner
            and self.hnf == other.hnf
        )

    def __hash__(self):
        return hash((self.owner, self.hnf))

    def __repr__(self):
        return f"KIdeal(norm={self.norm})"


# ---------------------------------------------------------------------------
# Maximal order (Round 2)


def _fp_kernel(rows, p):
    """Basis of the kernel of the map x -> x * rows over GF(p)."""
    m = len(rows)
    n = len(rows[0])
    A = [
        [rows[i][j] % p for j in range(n)] + [1 if k == i else 0 for k in range(m)]
        for i in range(m)
    ]
    # Gaussian elimination on the left block, carrying the identity
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if A[i][col] % p), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][col], p - 2, p)
        A[r] = [x * inv % p for x in A[r]]
        for i in range(m):
            if i != r and A[i][col]:
                f = A[i][col]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[r])]
        r += 1
    return [row[n:] for row in A[r:]]


def _p_radical(order, p):
    """Generators (power-basis rows) of the p-radical of order/p*order."""
    table = order.mult_table
    m = 4
    # Frobenius matrix: rows = coords of (basis_i)^p mod p
    def mul_mod(x, y):
        out = [0, 0, 0, 0]
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    if b:
                        ab = a * b % p
                        row = table[i][j]
                        for k in range(4):
                            out[k] = (out[k] + ab * row[k]) % p
        return out

    one = [c % p for c in order.int_coords_of(order.ctx.one)]

    def pow_mod(x, e):
        result = list(one)
        base = list(x)
        while e:
            if e & 1:
                result = mul_mod(result, base)
            base = mul_mod(base, base)
            e >>= 1
        return result

    frob = [pow_mod([1 if j == i else 0 for j in range(4)], p) for i in range(4)]
    power = frob
    pm = p
    while pm < 4:
        power = [[sum(power[i][k] * frob[k][j] for k in range(4)) % p for j in range(4)]
                 for i in range(4)]
        pm *= p
    kernel = _fp_kernel(power, p)
    gens = [[p * x for x in row] for row in linalg.identity_matrix(4)]
    for row in kernel:
        gens.append([int(c) for c in row])
    # rows over the order basis -> power-basis rows
    B = [list(r) for r in order.basis]
    return [linalg.vec_mat(g, B) for g in gens]


def _multiplier_ring(ctx, lattice_rows):
    """Ring of multipliers {x in K : x * L <= L} as an Order."""
    H, r = linalg.hnf_rows_frac(lattice_rows)
    if r != 4:
        raise ValueError("expected a full-rank lattice")
    Binv = linalg.mat_inv(H)
    cols = []
    for row in H:
        g = FieldElem(ctx, row)
        A = linalg.mat_mul(g.mul_matrix(), Binv)  # x -> coords of x*g over L
        for col in linalg.transpose(A):
            cols.append(col)
    stacked = linalg.transpose(cols)  # 4 x (4*rank)
    rows = linalg.preimage_integral(stacked)
    return Order(ctx, rows, check=False)


def maximal_order(ctx, rho_seed=1):
    """The maximal order O_K by Round-2 saturation at every prime whose
    square divides disc(Z[pi]).  May raise FactorizationFailure."""
    order = Order(ctx, linalg.identity_matrix(4), check=False)
    disc0 = order.disc
    fac = arith.factorint(disc0, rho_seed)
    for p in sorted(fac):
        if fac[p] < 2:
            continue
        while True:
            rad = _p_radical(order, p)
            bigger = _multiplier_ring(ctx, rad)
            if bigger.basis == order.basis:
                break
            order = bigger
    order._check_ring()
    idx = Order(ctx, linalg.identity_matrix(4), check=False).index_in(order)
    assert order.disc * idx * idx == disc0
    return order


def p_maximality_certificate(ctx, order, p):
    """True when the ring of multipliers of the p-radical is the order
    itself (the Round-2 stopping criterion, re-run as a check)."""
    rad = _p_radical(order, p)
    bigger = _multiplier_ring(ctx, rad)
    return bigger.basis == order.basis


# ---------------------------------------------------------------------------
# The special orders and the order <-> ideal dictionary


def special_orders(ctx):
    """(O_F, O_F[pi], Z[pi, pibar]) for the context."""
    OF = RealOrder(ctx)
    one, w, pi = ctx.one, ctx.omega_elem, ctx.pi
    s = ctx.s_elem
    OFpi = Order(ctx, [list(e.coords) for e in (one, w, pi, w * pi)])
    Zpp = Order(ctx, [list(e.coords) for e in (one, s, pi, s * pi)])
    return OF, OFpi, Zpp


def conductor_ideal(order, OK):
    """The conductor {x in K : x * O_K <= order} as a KIdeal owned by OK."""
    if not OK.contains_order(order):
        raise NotSubring("order is not contained in the maximal order")
    Binv = order.inv_basis
    cols = []
    for g in OK.basis_elements():
        A = linalg.mat_mul(g.mul_matrix(), Binv)
        for col in linalg.transpose(A):
            cols.append(col)
    stacked = linalg.transpose(cols)
    rows = linalg.preimage_integral(stacked)
    # rows are power-basis coords; convert to OK coordinates
    out = []
    for row in rows:
        v = OK.int_coords_of(FieldElem(order.ctx, row))
        if v is None:
            raise ValueError("conductor is not contained in the maximal order")
        out.append(v)
    return KIdeal(OK, out)


def order_intersect_f(order):
    """The lattice order ^ F as rows of (u, v) coordinates over {1, w}."""
    ctx = order.ctx
    w = ctx.omega_elem
    # change of basis: {1, w, pi, w*pi} spans K
    C = [list(ctx.one.coords), list(w.coords), list(ctx.pi.coords), list((w * ctx.pi).coords)]
    Cinv = linalg.mat_inv(C)
    BC = linalg.mat_mul([list(r) for r in order.basis], Cinv)
    tail = [[row[2], row[3]] for row in BC]
    d, tail_int = linalg.scale_to_int(tail)
    ker = linalg.left_kernel_int(tail_int)
    rows = []
    for y in ker:
        full = linalg.vec_mat(y, BC)
        rows.append([full[0], full[1]])
    H, r = linalg.hnf_rows_frac(rows)
    return H, r


def has_real_multiplication(order):
    """True when order ^ F = O_F."""
    H, r = order_intersect_f(order)
    return r == 2 and H == [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]


def identifying_ideal(order, OK, OF=None):
    """The O_F-ideal naming an order with O_F <= order <= O_K.

    Stacks the multiplication-by-omega_j matrices of the O_F basis expanded
    over the order's basis, clears denominators, and reads the ideal off the
    HNF (see the module docstring).
    """
    ctx = order.ctx
    if not has_real_multiplication(order):
        raise NotRMOrder("order ^ F is not the maximal real order")
    alphas = [ctx.one, ctx.omega_elem]
    omegas = OK.basis_elements()
    Binv = order.inv_basis
    blocks = []
    for om in omegas:
        Mj = [[Fraction(0)] * 2 for _ in range(4)]
        for i, al in enumerate(alphas):
            coords = linalg.vec_mat(list((al * om).coords), Binv)
            for k in range(4):
                Mj[k][i] = coords[k]
        blocks.extend(Mj)
    d = 1
    for row in blocks:
        for x in row:
            if isinstance(x, Fraction):
                d = linalg.lcm(d, x.denominator)
    dM = [[int(x * d) for x in row] for row in blocks]
    H, r = linalg.hnf_rows_int(dM)
    if r != 2:
        raise ValueError("stacked matrix does not have full column rank")
    Hinv = linalg.mat_inv(H)
    dHinv = [[x * d for x in row] for row in Hinv]
    for row in dHinv:
        for x in row:
            if isinstance(x, Fraction) and x.denominator != 1:
                raise ValueError("d * H^{-1} is not integral; construction violated")
    cols = linalg.transpose([[int(x) for x in row] for row in dHinv])
    return OFIdeal(ctx, cols)


def order_from_ideal(fplus, OK, OF=None):
    """The order O_F + fplus * O_K attached to an integral O_F-ideal."""
    ctx = fplus.ctx
    rows = [list(ctx.one.coords), list(ctx.omega_elem.coords)]
    for g in fplus.elements():
        for om in OK.basis_elements():
            rows.append(list((g * om).coords))
    return Order(ctx, rows, check=False)
