"""Polynomial arithmetic and factorization over GF(p).

Polynomials are coefficient lists [c0, c1, ...] with entries reduced mod p
and no trailing zeros ([] is the zero polynomial).  Factorization runs
squarefree decomposition, then distinct-degree, then Cantor-Zassenhaus
equal-degree splitting driven by a seeded RNG for reproducibility.
"""

import random


def trim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def add(f, g, p):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % p
    return trim(out)


def sub(f, g, p):
    return add(f, [(-c) % p for c in g], p)


def mul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return trim(out)


def divmod_poly(f, g, p):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(f)
    dg = len(g) - 1
    inv_lead = pow(g[-1], p - 2, p)
    q = [0] * max(len(f) - dg, 0)
    while len(f) - 1 >= dg and f:
        k = len(f) - 1 - dg
        c = f[-1] * inv_lead % p
        q[k] = c
        for i, b in enumerate(g):
            f[k + i] = (f[k + i] - c * b) % p
        trim(f)
    return trim(q), f


def mod(f, g, p):
    return divmod_poly(f, g, p)[1]


def monic(f, p):
    if not f:
        return []
    inv = pow(f[-1], p - 2, p)
    return [c * inv % p for c in f]


def gcd(f, g, p):
    while g:
        f, g = g, mod(f, g, p)
    return monic(f, p)


def powmod(f, e, g, p):
    result = [1]
    base = mod(f, g, p)
    while e:
        if e & 1:
            result = mod(mul(result, base, p), g, p)
        base = mod(mul(base, base, p), g, p)
        e >>= 1
    return result


def derivative(f, p):
    return trim([i * c % p for i, c in enumerate(f)][1:])


def eval_poly(f, x, p):
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def squarefree_part_factors(f, p):
    """Decompose monic f into [(g, m)] with g squarefree, product g^m = f."""
    out = []
    fp = derivative(f, p)
    if not fp:
        # f is a p-th power: f(x) = h(x^p); recurse on h
        h = [f[i] for i in range(0, len(f), p)]
        for g, m in squarefree_part_factors(trim(h), p):
            out.append((g, m * p))
        return out
    c = gcd(f, fp, p)
    w, _ = divmod_poly(f, c, p)
    m = 1
    while len(w) > 1:
        y = gcd(w, c, p)
        z, _ = divmod_poly(w, y, p)
        if len(z) > 1:
            out.append((z, m))
        c, _ = divmod_poly(c, y, p)
        w = y
        m += 1
    if len(c) > 1:
        # leftover c collects the factors with multiplicity divisible by p,
        # so c(x) = u(x^p); recurse on u
        assert all(c[i] == 0 for i in range(len(c)) if i % p), c
        u = trim([c[i] for i in range(0, len(c), p)])
        for g, mm in squarefree_part_factors(u, p):
            out.append((g, mm * p))
    return out


def _distinct_degree(f, p):
    """Split squarefree monic f into [(product of degree-d irreducibles, d)]."""
    out = []
    x = [0, 1]
    h = list(x)
    d = 0
    rest = list(f)
    while len(rest) - 1 >= 2 * (d + 1):
        d += 1
        h = powmod(h, p, rest, p)
        g = gcd(sub(h, x, p), rest, p)
        if len(g) > 1:
            out.append((g, d))
            rest, _ = divmod_poly(rest, g, p)
            h = mod(h, rest, p)
    if len(rest) > 1:
        out.append((rest, len(rest) - 1))
    return out


def _equal_degree(f, d, p, rng):
    """Cantor-Zassenhaus split of monic squarefree f, all factors degree d."""
    n = len(f) - 1
    if n == d:
        return [f]
    while True:
        a = [rng.randrange(p) for _ in range(n)]
        a = trim(a)
        if len(a) <= 1:
            continue
        g = gcd(a, f, p)
        if 1 < len(g) - 1 < n:
            pass
        elif p == 2:
            t = list(a)
            acc = list(a)
            for _ in range(d - 1):
                acc = powmod(acc, 2, f, p)
                t = add(t, acc, p)
            g = gcd(t, f, p)
        else:
            e = (p ** d - 1) // 2
            t = powmod(a, e, f, p)
            g = gcd(sub(t, [1], p), f, p)
        if 0 < len(g) - 1 < n:
            q, _ = divmod_poly(f, g, p)
            return _equal_degree(g, d, p, rng) + _equal_degree(q, d, p, rng)


def factor(f, p, seed=0):
    """Full factorization of f over GF(p).

    Returns (lead, [(irreducible monic factor, multiplicity)]) with factors
    sorted by (degree, coefficient tuple) so output is canonical.
    """
    f = trim([c % p for c in f])
    if not f:
        raise ValueError("cannot factor the zero polynomial")
    lead = f[-1]
    f = monic(f, p)
    rng = random.Random(seed)
    factors = {}
    for g, m in squarefree_part_factors(f, p):
        for h, d in _distinct_degree(g, p):
            for irr in _equal_degree(h, d, p, rng):
                key = tuple(irr)
                factors[key] = factors.get(key, 0) + m
    items = sorted(factors.items(), key=lambda kv: (len(kv[0]), kv[0]))
    return lead, [(list(k), v) for k, v in items]


def is_irreducible(f, p):
    _, facs = factor(f, p)
    return len(facs) == 1 and facs[0][1] == 1 and len(facs[0][0]) == len(f)
