"""Pluggable isogeny oracle and the default torsor simulator.

The oracle interface is three capabilities: apply a prime-power isogeny
chain, list the neighbors in the volcano of a real prime dividing v, and
compare varieties.  A real isogeny backend (theta-function evaluation over
F_q) would implement the same contracts; the simulator realizes them on the
class-group side exactly:

  * a simulated variety is an opaque keyed-hash id backed by hidden state
    (level vector over the primes of v, class-group element in Smith
    coordinates at that level's order);
  * prime descriptors act by translation in the class group of the current
    level's order (the class-group torsor), with simulated cost charged by
    isogeny degree N(l) per step;
  * vertical neighbors come from the surjections between class groups of
    adjacent levels: the up neighbor is the pushforward, the down neighbors
    are the fiber of the pushforward, one per kernel coset;
  * horizontal neighbors exist only on the surface and are the actions of
    the primes of O_K over the navigated real prime, excluding the inert
    case (principal, no isogeny), so their count is 1 + (K/l).

Worlds carry a hidden true conductor dividing v so end-to-end runs can be
scored against the truth by tests (never by the drivers).
"""

import hashlib
import random

from . import linalg
from .classgroup import decompose
from .errors import InadmissiblePrime, NotDivisor, NotVolcanoPrime
from .field_core import FieldElem
from .ideals import (
    k_contract_to_f,
    maximal_ideals_mod_l,
    of_divides,
    of_factor,
    of_valuation,
)
from .orders import KIdeal


class IsogenyOracle:
    """Behavioral contract for isogeny evaluation backends."""

    capabilities = frozenset({"apply_prime", "list_l_neighbors", "same_variety"})

    def apply_prime(self, A, prime, e):
        raise NotImplementedError

    def list_l_neighbors(self, A, real_prime):
        raise NotImplementedError

    def same_variety(self, A, B):
        raise NotImplementedError


class SimVariety:
    """Opaque handle; only the oracle can look inside."""

    __slots__ = ("uid", "world_tag")

    def __init__(self, uid, world_tag):
        self.uid = uid
        self.world_tag = world_tag

    def __eq__(self, other):
        return (
            isinstance(other, SimVariety)
            and self.uid == other.uid
            and self.world_tag == other.world_tag
        )

    def __hash__(self):
        return hash((self.uid, self.world_tag))

    def __repr__(self):
        return f"SimVariety({self.uid[:12]})"


class SimWorld(IsogenyOracle):
    """Faithful Cl-torsor with volcano level structure; see module docs."""

    _tag_counter = [0]

    def __init__(self, tower, v_sim, hidden_f, seed, group_seed=1):
        if not of_divides(hidden_f, v_sim):
            raise NotDivisor("hidden conductor must divide the navigated ideal")
        self.tower = tower
        self.ctx = tower.ctx
        self.v_sim = v_sim
        self.hidden_f = hidden_f
        self.seed = seed
        self.group_seed = group_seed
        facs = tower.v_factors if v_sim == tower.v else of_factor(v_sim)
        self.primes = [(P, of_valuation(v_sim, P)) for P, _e in facs]
        self.depths = tuple(d for _P, d in self.primes)
        self._key = hashlib.blake2b(f"simworld:{seed}".encode(), digest_size=16).digest()
        self._states = {}
        self._groups = {}
        self._prime_vec_cache = {}
        self._push_cache = {}
        self._kernel_cache = {}
        self._horizontal_cache = {}
        SimWorld._tag_counter[0] += 1
        self.tag = SimWorld._tag_counter[0]
        self.cost_degree = 0
        self.op_counts = {
            "apply_prime": 0,
            "isogeny_steps": 0,
            "list_neighbors": 0,
            "same_variety": 0,
        }

    # -- hidden state plumbing ------------------------------------------------

    def _mint(self, level, coords):
        payload = f"{tuple(level)}|{tuple(coords)}".encode()
        uid = hashlib.blake2b(payload, key=self._key, digest_size=16).hexdigest()
        self._states[uid] = (tuple(level), tuple(coords))
        return SimVariety(uid, self.tag)

    def _state(self, A):
        if not isinstance(A, SimVariety) or A.world_tag != self.tag:
            raise ValueError("variety does not belong to this world")
        return self._states[A.uid]

    def level_ideal(self, level):
        return self.tower.ideal_from_valuations(
            [(P, e) for (P, _d), e in zip(self.primes, level)]
        )

    def group_at(self, level):
        level = tuple(level)
        if level not in self._groups:
            order = self.tower.order_of(self.level_ideal(level))
            self._groups[level] = self.tower.class_group(order, seed=self.group_seed)
        return self._groups[level]

    def hidden_level(self):
        return tuple(of_valuation(self.hidden_f, P) for P, _d in self.primes)

    def start_variety(self, rng=None):
        rng = rng or random.Random(self.seed)
        level = self.hidden_level()
        G = self.group_at(level)
        coords = tuple(rng.randrange(d) for d in G.snf)
        return self._mint(level, coords)

    def hidden_state_of(self, A):
        """Test hook: the hidden (level, coords) behind an id."""
        return self._state(A)

    # -- oracle interface -------------------------------------------------------

    def apply_prime(self, A, prime, e):
        """Translate by the class of prime^e at A's level; cost is charged
        per step at the isogeny degree N(l below the prime)."""
        self.op_counts["apply_prime"] += 1
        level, coords = self._state(A)
        if e == 0:
            return A
        if prime.ell in self.tower.undesirable:
            raise InadmissiblePrime(f"{prime.ell} is excluded at this conductor")
        G = self.group_at(level)
        key = (level, prime)
        if key not in self._prime_vec_cache:
            vec = decompose(G, prime.as_ideal(G.order_ref))
            self._prime_vec_cache[key] = G.smith_coords(vec)
        pc = self._prime_vec_cache[key]
        new = tuple((c + e * t) % d for c, t, d in zip(coords, pc, G.snf))
        self.cost_degree += abs(e) * real_norm_below(self.ctx, prime)
        self.op_counts["isogeny_steps"] += abs(e)
        return self._mint(level, new)

    def same_variety(self, A, B):
        self.op_counts["same_variety"] += 1
        if A.world_tag != self.tag or B.world_tag != self.tag:
            raise ValueError("cross-world comparison")
        return A.uid == B.uid

    def list_l_neighbors(self, A, real_prime):
        self.op_counts["list_neighbors"] += 1
        idx = next((i for i, (P, _d) in enumerate(self.primes) if P == real_prime), None)
        if idx is None:
            raise NotVolcanoPrime(f"{real_prime} does not divide the navigated ideal")
        level, coords = self._state(A)
        depth = self.depths[idx]
        out = []
        if level[idx] > 0:
            out.append(self._up_neighbor(level, coords, idx))
        if level[idx] == 0:
            out.extend(self._horizontal_neighbors(level, coords, idx))
        if level[idx] < depth:
            out.extend(self._down_neighbors(level, coords, idx))
        self.cost_degree += len(out) * real_prime.norm
        return out

    # -- vertical structure -------------------------------------------------------

    def _push_matrix(self, frm, to):
        """Rows: Smith coords in group_at(to) of group_at(frm)'s base primes."""
        key = (frm, to)
        if key not in self._push_cache:
            Gt = self.group_at(to)
            rows = []
            for p in self.group_at(frm).factor_base:
                vec = decompose(Gt, p.as_ideal(Gt.order_ref))
                rows.append(list(Gt.smith_coords(vec)))
            self._push_cache[key] = rows
        return self._push_cache[key]

    def _push_coords(self, frm, to, coords):
        Gf = self.group_at(frm)
        Gt = self.group_at(to)
        M = self._push_matrix(frm, to)
        vec = Gf.lift_coords(coords)
        out = [0] * len(Gt.snf)
        for x, row in zip(vec, M):
            if x:
                for j, c in enumerate(row):
                    out[j] += x * c
        return tuple(o % d for o, d in zip(out, Gt.snf))

    def _up_neighbor(self, level, coords, idx):
        up = list(level)
        up[idx] -= 1
        up = tuple(up)
        return self._mint(up, self._push_coords(level, up, coords))

    def _down_neighbors(self, level, coords, idx):
        down = list(level)
        down[idx] += 1
        down = tuple(down)
        Gd = self.group_at(down)
        G = self.group_at(level)
        M = self._push_matrix(down, level)
        # one preimage: base exponents z with sum z_i M_i = coords mod snf
        rows = [list(r) for r in M] + [
            [G.snf[j] if t == j else 0 for j in range(len(G.snf))]
            for t in range(len(G.snf))
        ]
        H, U, r = linalg.hnf_rows_transform(rows)
        y = linalg.solve_in_rowspan_int(H, list(coords))
        assert y is not None, "level pushforward is not surjective"
        z = [0] * len(rows)
        for c, urow in zip(y, U[:r]):
            if c:
                for t in range(len(rows)):
                    z[t] += c * urow[t]
        c0 = self._base_combination_coords(Gd, z[: len(M)])
        assert self._push_coords(down, level, c0) == tuple(coords)
        return [
            self._mint(down, tuple((a + b) % d for a, b, d in zip(c0, k, Gd.snf)))
            for k in self._kernel_elements(down, level)
        ]

    def _base_combination_coords(self, G, base_coeffs):
        vec = list(base_coeffs)
        return G.smith_coords(vec)

    def _kernel_elements(self, frm, to):
        """All classes of group_at(frm) pushing to zero in group_at(to)."""
        key = (frm, to)
        if key not in self._kernel_cache:
            Gf = self.group_at(frm)
            Gt = self.group_at(to)
            m_f = len(Gf.snf)
            psi = []
            for i in range(m_f):
                e = [0] * m_f
                e[i] = 1
                psi.append(list(self._push_coords(frm, to, tuple(e))))
            stacked = psi + [
                [Gt.snf[j] if t == j else 0 for j in range(len(Gt.snf))]
                for t in range(len(Gt.snf))
            ]
            gens = [row[:m_f] for row in linalg.left_kernel_int(stacked)]
            gens += [
                [Gf.snf[j] if t == j else 0 for j in range(m_f)] for t in range(m_f)
            ]
            zero = tuple(0 for _ in range(m_f))
            elems = {zero}
            gens = [tuple(c % d for c, d in zip(g, Gf.snf)) for g in gens]
            changed = True
            while changed:
                changed = False
                for g in gens:
                    for e in list(elems):
                        s = tuple((a + b) % d for a, b, d in zip(e, g, Gf.snf))
                        if s not in elems:
                            elems.add(s)
                            changed = True
            self._kernel_cache[key] = sorted(elems)
        return self._kernel_cache[key]

    # -- horizontal structure -------------------------------------------------------

    def _horizontal_actions(self, level, idx):
        key = (level, idx)
        if key not in self._horizontal_cache:
            P = self.primes[idx][0]
            G = self.group_at(level)
            order = G.order_ref
            acts = []
            pid_target = P.ideal(self.ctx)
            for Q, deg in maximal_ideals_mod_l(self.tower.OK, P.ell):
                below = k_contract_to_f(self.tower.OK, Q)
                if below.hnf != pid_target.hnf:
                    continue
                if deg == 2 * P.residue_degree:
                    continue  # inert over P: principal, no isogeny
                QO = _intersect_with_order(self.tower.OK, Q, order)
                vec = decompose(G, QO)
                acts.append(G.smith_coords(vec))
            self._horizontal_cache[key] = acts
        return self._horizontal_cache[key]

    def _horizontal_neighbors(self, level, coords, idx):
        G = self.group_at(level)
        return [
            self._mint(level, tuple((c + t) % d for c, t, d in zip(coords, pc, G.snf)))
            for pc in self._horizontal_actions(level, idx)
        ]

    def split_symbol_at(self, idx):
        """1 + (K/l) horizontal-count convention, via the surface actions."""
        surface = tuple(0 for _ in self.primes)
        return len(self._horizontal_actions(surface, idx)) - 1


def _intersect_with_order(OK, Q, order):
    """Q ^ order as a KIdeal of the order (conductor coprime to Q)."""
    BQ = [linalg.vec_mat(list(row), [list(r) for r in OK.basis]) for row in Q.hnf]
    BO = [list(r) for r in order.basis]
    inter = linalg.intersect_rowspans(BQ, BO)
    rows = []
    for row in inter:
        v = order.int_coords_of(FieldElem(order.ctx, row))
        assert v is not None
        rows.append(v)
    return KIdeal(order, rows)


def real_norm_below(ctx, prime):
    """Norm of the real prime under a descriptor (the isogeny degree)."""
    from . import arith

    D = ctx.real.disc
    ell = prime.ell
    if D % ell == 0:
        f_below = 1
    elif arith.kronecker(D, ell) == -1:
        f_below = 2
    else:
        f_below = 1
    return ell ** f_below


def sim_build(tower, v_sim, hidden_f, seed, group_seed=1):
    """Construct a simulator world and its starting variety."""
    world = SimWorld(tower, v_sim, hidden_f, seed, group_seed=group_seed)
    return world, world.start_variety()


def apply_prime(world, A, prime, e):
    return world.apply_prime(A, prime, e)


def list_l_neighbors(world, A, real_prime):
    return world.list_l_neighbors(A, real_prime)


def same_variety(world, A, B):
    return world.same_variety(A, B)
