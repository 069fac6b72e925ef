"""Main drivers: volcano climbing, conductor computation from above,
certificates and their verification.

The conductor of the endomorphism ring is pinned prime by prime.  Small
primes are climbed in their volcanoes: the distance to the floor read off
non-backtracking walks gives the valuation, and replacing the variety by
the top of its path removes the prime entirely.  Large primes are decided
through class-group relations: a relation holding in the order one level
shy of a prime power and failing at the prime power divides the candidate
set in two, and evaluating it on the variety through the isogeny oracle
picks the half containing the hidden conductor.

Certificates package the separating relations so a third party can re-run
only the oracle part.  Verification never touches class groups: it is
exactly the two evaluation loops plus structural checks, and malformed
certificates report false with a reason rather than raising.
"""

from dataclasses import dataclass, field

from . import fppoly
from .errors import (
    NoRelationFound,
    NotVolcanoPrime,
    OracleInconsistency,
    RequirementsViolated,
)
from .ideals import of_divides, of_factor, of_valuation
from .orders import OFIdeal
from .relations import RelationParams, find_relation


@dataclass(frozen=True)
class DriverConfig:
    C_bound: int = 3
    relation: RelationParams = field(default_factory=RelationParams)
    seed: int = 1
    group_seed: int = 1
    force: bool = False

    def __post_init__(self):
        if self.C_bound < 3:
            raise ValueError("the small/large cutoff must be at least 3")


@dataclass(frozen=True)
class Certificate:
    """(u, v, field descriptor, separating relations keyed by (prime, k))."""

    u: OFIdeal
    v: OFIdeal
    field_desc: tuple  # (q, a1, a2)
    relations: tuple   # (((prime_hnf, k), Relation), ...) sorted

    def relation_for(self, prime_hnf, k):
        for (hnf, kk), rel in self.relations:
            if hnf == prime_hnf and kk == k:
                return rel
        return None


@dataclass(frozen=True)
class VerifyOutcome:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def evaluate_relation(oracle, A, relation):
    """True iff the isogeny chain of the relation fixes A."""
    B = A
    for prime, e in relation.entries:
        B = oracle.apply_prime(B, prime, e)
    return oracle.same_variety(A, B)


# ---------------------------------------------------------------------------
# Volcano navigation


def _distance_to_floor(oracle, A, real_prime, depth):
    """Length of the shortest path from A to the floor of its volcano.

    Non-backtracking walks from every first step; walks that start downward
    descend straight to the floor, so the minimum over first steps is the
    true distance.  Vertices of degree one are the floor (any prime
    dividing v has depth >= 1, so no other vertex has degree one).
    """
    neighbors = oracle.list_l_neighbors(A, real_prime)
    if len(neighbors) == 0:
        raise OracleInconsistency("isolated vertex in a volcano of positive depth")
    if len(neighbors) == 1:
        return 0
    best = None
    for first in neighbors:
        dist = _walk_to_floor(oracle, A, first, real_prime, cap=depth + 2)
        if dist is not None and (best is None or dist < best):
            best = dist
    if best is None:
        raise OracleInconsistency("no walk reached the floor within the depth cap")
    return best


def _walk_to_floor(oracle, start, first, real_prime, cap):
    prev, cur = start, first
    dist = 1
    while dist <= cap:
        nbrs = oracle.list_l_neighbors(cur, real_prime)
        if len(nbrs) == 1:
            return dist
        candidates = [n for n in nbrs if not oracle.same_variety(n, prev)]
        if not candidates:
            candidates = nbrs  # doubled edge; forced step back
        prev, cur = cur, candidates[0]
        dist += 1
    return None


def isogeny_climb(oracle, A, real_prime, depth):
    """(valuation of the conductor at the prime, variety at the surface).

    The valuation is depth minus the distance to the floor; ascending picks
    the unique neighbor one step farther from the floor until the surface.
    """
    if depth < 1:
        raise NotVolcanoPrime("climbing needs a prime dividing the navigated ideal")
    dist = _distance_to_floor(oracle, A, real_prime, depth)
    level = depth - dist
    if not (0 <= level <= depth):
        raise OracleInconsistency("distance to floor exceeds the volcano depth")
    cur = A
    cur_dist = dist
    while cur_dist < depth:
        nbrs = oracle.list_l_neighbors(cur, real_prime)
        up = None
        for n in nbrs:
            d = _distance_to_floor(oracle, n, real_prime, depth)
            if d == cur_dist + 1:
                up = n
                break
        if up is None:
            raise OracleInconsistency("no ascending neighbor found off the surface")
        cur = up
        cur_dist += 1
    return level, cur


# ---------------------------------------------------------------------------
# Computing the conductor from above


def _relation_seed(config, P, k):
    return hash((config.seed, P.ell, P.hnf, k)) & 0x7FFFFFFF


def relation_for_prime_power(tower, v, P, k, config):
    """Separating relation for P^k | v: holds in O(v with P-exponent k-1),
    fails in O(P^k)."""
    from .relations import relation_for_prime_power as _rfp

    params = RelationParams(
        mu=config.relation.mu,
        k0=config.relation.k0,
        B_override=config.relation.B_override,
        max_trials=config.relation.max_trials,
        seed=_relation_seed(config, P, k),
    )
    return _rfp(tower, v, P, k, params, group_seed=config.group_seed)


def compute_endoring(tower, oracle, A, config, trace=None):
    """The O_F-ideal identifying End A, computed from above.

    Small primes (norm below the cutoff) go through isogeny climbing and
    are removed from the navigated ideal; the remaining primes are decided
    power by power through separating relations evaluated on A.
    """
    report = tower.requirements()
    if not report.all_ok() and not config.force:
        raise RequirementsViolated("; ".join(report.messages) or "requirements failed")
    ctx = tower.ctx
    u_vals = []
    remaining = []
    cur = A
    factors = sorted(tower.v_factors, key=lambda pe: pe[0].sort_key())
    for P, depth in factors:
        if P.norm < config.C_bound:
            val, cur = isogeny_climb(oracle, cur, P, depth)
            u_vals.append((P, val))
            if trace is not None:
                trace.append({"prime": P, "method": "climb", "valuation": val})
        else:
            remaining.append((P, depth))
    v_rem = tower.ideal_from_valuations(remaining)
    for P, depth in remaining:
        val = 0
        for k in range(1, depth + 1):
            rel = relation_for_prime_power(tower, v_rem, P, k, config)
            if evaluate_relation(oracle, cur, rel):
                break  # the relation holds for A, so P^k does not divide
            val = k
            if trace is not None:
                trace.append({"prime": P, "method": "relation", "k": k, "relation": rel})
        u_vals.append((P, val))
        if trace is not None:
            trace.append({"prime": P, "method": "valuation", "valuation": val})
    return tower.ideal_from_valuations(u_vals)


# ---------------------------------------------------------------------------
# Certify / Verify


def certify(tower, u, v, config):
    """Certificate that the conductor equals u, against the ambient v.

    Covers both directions: for primes with room above u, a relation that
    holds in O(u) but fails one power higher; for primes dividing u, a
    relation that holds one power lower but fails at the power in u.
    """
    if not of_divides(u, v):
        raise ValueError("u must divide v")
    ctx = tower.ctx
    v_facs = of_factor(v) if v != tower.v else tower.v_factors
    entries = []
    for P, b in sorted(v_facs, key=lambda pe: pe[0].sort_key()):
        a = of_valuation(u, P)
        if b - a > 0:
            rel = _certify_relation(tower, u, P, a + 1, config, upper=True)
            entries.append(((P.hnf, a + 1), rel))
        if a > 0:
            lower = _shrink_at(tower, u, P)
            rel = _certify_relation(tower, lower, P, a, config, upper=False)
            entries.append(((P.hnf, a), rel))
    entries.sort(key=lambda kv: (kv[0][0], kv[0][1]))
    return Certificate(
        u=u,
        v=v,
        field_desc=(ctx.q, ctx.a1, ctx.a2),
        relations=tuple(entries),
    )


def _shrink_at(tower, u, P):
    facs = of_factor(u)
    return tower.ideal_from_valuations(
        [(Q, e - 1 if Q == P else e) for Q, e in facs]
    )


def _certify_relation(tower, hold_ideal, P, k, config, upper):
    if P.norm < 3:
        raise NoRelationFound(
            "separating relations need primes of norm at least 3",
            {"norm": P.norm},
        )
    O1 = tower.order_of(hold_ideal)
    O2 = tower.order_of(tower.ideal_from_valuations([(P, k)]))
    G1 = tower.class_group(O1, seed=config.group_seed)
    G2 = tower.class_group(O2, seed=config.group_seed)
    params = RelationParams(
        mu=config.relation.mu,
        k0=config.relation.k0,
        B_override=config.relation.B_override,
        max_trials=config.relation.max_trials,
        seed=_relation_seed(config, P, k) ^ (0 if upper else 1),
    )
    return find_relation(O1, O2, G1, G2, params)


def verify(ctx, oracle, A, cert):
    """Third-party check of a certificate against a variety.

    Structural problems and failed evaluations both yield a false outcome
    with a reason; only oracle evaluations are consulted.
    """
    ok, reason = _structural_check(ctx, cert)
    if not ok:
        return VerifyOutcome(False, reason)
    v_facs = of_factor(cert.v)
    for P, b in v_facs:
        a = of_valuation(cert.u, P)
        if b - a > 0:
            rel = cert.relation_for(P.hnf, a + 1)
            if not evaluate_relation(oracle, A, rel):
                return VerifyOutcome(
                    False, f"upper-bound relation at norm-{P.norm} prime does not fix A"
                )
        if a > 0:
            rel = cert.relation_for(P.hnf, a)
            if evaluate_relation(oracle, A, rel):
                return VerifyOutcome(
                    False, f"lower-bound relation at norm-{P.norm} prime fixes A"
                )
    return VerifyOutcome(True, "")


def _structural_check(ctx, cert):
    if cert.field_desc != (ctx.q, ctx.a1, ctx.a2):
        return False, "certificate was issued for a different field"
    if not of_divides(cert.u, cert.v):
        return False, "u does not divide v"
    try:
        v_facs = of_factor(cert.v)
    except Exception:
        return False, "cannot factor v"
    needed = []
    for P, b in v_facs:
        a = of_valuation(cert.u, P)
        if b - a > 0:
            needed.append((P.hnf, a + 1))
        if a > 0:
            needed.append((P.hnf, a))
    have = [key for key, _rel in cert.relations]
    if sorted(needed) != sorted(have):
        return False, "relation coverage does not match the divisor structure"
    f = ctx.weil_poly()
    for (hnf, k), rel in cert.relations:
        if not rel.entries:
            return False, "empty separating relation"
        for prime, e in rel.entries:
            if e < 1:
                return False, "nonpositive exponent in a relation"
            r = list(prime.rpoly)
            if r[-1] != 1:
                return False, "relation prime polynomial is not monic"
            _, rem = fppoly.divmod_poly([c % prime.ell for c in f], r, prime.ell)
            if rem:
                return False, "relation prime polynomial does not divide the Weil polynomial"
    return True, ""
