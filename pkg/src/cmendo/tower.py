"""Shared bundle of the objects every driver needs.

A FieldTower owns the maximal order, the special orders, the identifying
ideal v of O_F[pi] with its factorization, the excluded-prime set, and
caches of orders O(g) for divisors g | v and of their class groups.  Class
group construction retries with a doubled factor-base bound when saturation
fails, per the documented recovery path.
"""

import os

from .classgroup import compute_class_group, default_bound
from .errors import FactorBaseTooSmall
from .field_core import validate_requirements
from .ideals import of_factor, of_mul, of_pow, undesirable_prime_set
from .orders import (
    OFIdeal,
    identifying_ideal,
    maximal_order,
    order_from_ideal,
    special_orders,
)


class FieldTower:
    def __init__(self, ctx, rho_seed=1):
        self.ctx = ctx
        self.OK = maximal_order(ctx, rho_seed)
        self.OF, self.OFpi, self.Zpp = special_orders(ctx)
        self.v = identifying_ideal(self.OFpi, self.OK)
        self.v_factors = of_factor(self.v, rho_seed)
        self.undesirable = frozenset(undesirable_prime_set(ctx, self.OK, self.v.norm, rho_seed))
        self._orders = {}
        self._groups = {}
        self._requirements = None

    def requirements(self):
        if self._requirements is None:
            self._requirements = validate_requirements(self.ctx)
        return self._requirements

    def order_of(self, fplus):
        """The order O_F + fplus * O_K, cached by the ideal's HNF."""
        if fplus.is_unit():
            return self.OK
        key = fplus.hnf
        if key not in self._orders:
            self._orders[key] = order_from_ideal(fplus, self.OK)
        return self._orders[key]

    def ideal_from_valuations(self, vals):
        """OFIdeal prod P^e from a list of (RealPrime, exponent)."""
        acc = OFIdeal.unit(self.ctx)
        for P, e in vals:
            if e:
                acc = of_mul(acc, of_pow(P.ideal(self.ctx), e))
        return acc

    def divisors_of_v(self):
        """All divisors of v as OFIdeals, ascending by norm."""
        out = [[]]
        for P, e in self.v_factors:
            out = [cur + [(P, k)] for cur in out for k in range(e + 1)]
        ideals = [self.ideal_from_valuations(vals) for vals in out]
        return sorted(ideals, key=lambda a: (a.norm, a.hnf))

    def class_group(self, fplus_or_order, seed=1, bound=None, max_doublings=3):
        """Cl(O(fplus)) with in-memory caching and bound-doubling retries."""
        order = (
            fplus_or_order
            if not isinstance(fplus_or_order, OFIdeal)
            else self.order_of(fplus_or_order)
        )
        b = bound or default_bound(order.disc)
        key = (order.key(), b, seed)
        if key in self._groups:
            return self._groups[key]
        cached = self._load_cached(order, b, seed)
        if cached is not None:
            self._groups[key] = cached
            return cached
        attempt = b
        for _ in range(max_doublings + 1):
            try:
                G = compute_class_group(order, attempt, seed, undesirable=self.undesirable)
                self._groups[key] = G
                self._store_cached(G)
                return G
            except FactorBaseTooSmall:
                attempt *= 2
        raise FactorBaseTooSmall(f"no saturation up to bound {attempt}")

    # -- optional on-disk cache ---------------------------------------------

    def _cache_path(self, order, bound, seed):
        root = os.environ.get("CMENDO_CACHE_DIR")
        if not root:
            return None
        from .serialize import classgroup_cache_name

        return os.path.join(root, classgroup_cache_name(self.ctx, order, bound, seed))

    def _load_cached(self, order, bound, seed):
        path = self._cache_path(order, bound, seed)
        if not path or not os.path.exists(path):
            return None
        from .serialize import load_classgroup

        try:
            return load_classgroup(path, self, order, bound, seed)
        except Exception:
            return None

    def _store_cached(self, G):
        path = self._cache_path(G.order_ref, G.bound, G.seed)
        if not path:
            return
        from .serialize import dump_classgroup

        os.makedirs(os.path.dirname(path), exist_ok=True)
        dump_classgroup(G, path)
