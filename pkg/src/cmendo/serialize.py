"""Canonical structured-text serialization.

Human-readable nested key/value sections, two-space indentation, decimal
integers only.  Writers are deterministic (sorted sections, canonical entry
order), so re-serialization is byte-identical; parsers are strict and
reject unknown keys with positioned errors.

Documents:
  cmendo-cert/1        certificates (u, v, field, separating relations)
  cmendo-ideal/1       an O_F ideal with its field
  cmendo-report/1      a requirements report
  cmendo-classgroup/1  a class-group presentation (cache payload)
"""

import hashlib

from .errors import ParseError
from .ideals import PrimeOverL
from .orders import OFIdeal
from .relations import Relation

CERT_TAG = "cmendo-cert/1"
IDEAL_TAG = "cmendo-ideal/1"
REPORT_TAG = "cmendo-report/1"
CLASSGROUP_TAG = "cmendo-classgroup/1"


# ---------------------------------------------------------------------------
# Generic tree <-> text


def _emit(lines, indent, key, value=None):
    pad = "  " * indent
    if value is None:
        lines.append(f"{pad}{key}:")
    else:
        lines.append(f"{pad}{key}: {value}")


def _ints(xs):
    return " ".join(str(int(x)) for x in xs)


class _Cursor:
    """Indentation-driven reader over the raw lines."""

    def __init__(self, text):
        self.rows = []
        for i, raw in enumerate(text.splitlines()):
            if not raw.strip():
                continue
            stripped = raw.lstrip(" ")
            pad = len(raw) - len(stripped)
            if pad % 2 != 0:
                raise ParseError("odd indentation", line=i + 1)
            if ":" not in stripped:
                raise ParseError("expected 'key:' or 'key: value'", line=i + 1)
            key, _, rest = stripped.partition(":")
            self.rows.append((i + 1, pad // 2, key.strip(), rest.strip()))
        self.pos = 0

    def peek(self):
        return self.rows[self.pos] if self.pos < len(self.rows) else None

    def take(self):
        row = self.peek()
        if row is None:
            raise ParseError("unexpected end of document")
        self.pos += 1
        return row

    def expect_value(self, key, depth):
        row = self.take()
        if row[1] != depth or row[2] != key or row[3] == "":
            raise ParseError(f"expected '{key}: <value>'", line=row[0])
        return row[3]

    def expect_section(self, key, depth):
        row = self.take()
        if row[1] != depth or row[2] != key or row[3] != "":
            raise ParseError(f"expected section '{key}:'", line=row[0])

    def at_section(self, key, depth):
        row = self.peek()
        return row is not None and row[1] == depth and row[2] == key and row[3] == ""

    def at_depth(self, depth):
        row = self.peek()
        return row is not None and row[1] >= depth

    def done(self):
        if self.pos != len(self.rows):
            row = self.rows[self.pos]
            raise ParseError(f"unexpected key '{row[2]}'", line=row[0])


def _parse_int_list(text, line, count=None):
    try:
        xs = [int(t) for t in text.split()]
    except ValueError:
        raise ParseError("expected decimal integers", line=line)
    if count is not None and len(xs) != count:
        raise ParseError(f"expected {count} integers", line=line)
    return xs


def _parse_int(text, line):
    try:
        return int(text)
    except ValueError:
        raise ParseError("expected a decimal integer", line=line)


# ---------------------------------------------------------------------------
# Shared pieces


def _emit_field(lines, indent, ctx_or_desc):
    if hasattr(ctx_or_desc, "q"):
        q, a1, a2 = ctx_or_desc.q, ctx_or_desc.a1, ctx_or_desc.a2
    else:
        q, a1, a2 = ctx_or_desc
    _emit(lines, indent, "field")
    _emit(lines, indent + 1, "q", q)
    _emit(lines, indent + 1, "a1", a1)
    _emit(lines, indent + 1, "a2", a2)


def _parse_field(cur, depth):
    cur.expect_section("field", depth)
    q = _parse_int(cur.expect_value("q", depth + 1), cur.pos)
    a1 = _parse_int(cur.expect_value("a1", depth + 1), cur.pos)
    a2 = _parse_int(cur.expect_value("a2", depth + 1), cur.pos)
    return (q, a1, a2)


def _hnf_flat(hnf):
    return [x for row in hnf for x in row]


def _emit_relation(lines, indent, rel, q):
    _emit(lines, indent, "entries")
    for prime, e in rel.entries:
        conj = prime.conj_descriptor_q(q) if hasattr(prime, "conj_descriptor_q") else None
        _emit(lines, indent + 1, "entry")
        _emit(lines, indent + 2, "ell", prime.ell)
        _emit(lines, indent + 2, "rpoly", _ints(prime.rpoly))
        _emit(lines, indent + 2, "conjugate", _conj_flag(prime, q))
        _emit(lines, indent + 2, "exponent", e)
    _emit(lines, indent, "meta")
    for key, value in rel.meta:
        _emit(lines, indent + 1, str(key), value)


def _conj_flag(prime, q):
    """1 when the stored polynomial is the lexicographically larger member
    of its conjugate pair (0 for self-conjugate or the smaller one)."""
    partner = _conj_rpoly(prime.rpoly, prime.ell, q)
    return 1 if tuple(partner) < tuple(prime.rpoly) else 0


def _conj_rpoly(rpoly, ell, q):
    r = list(rpoly)
    d = len(r) - 1
    s = [(r[d - k] * pow(q, d - k, ell)) % ell for k in range(d + 1)]
    lead_inv = pow(s[d], ell - 2, ell)
    return tuple(c * lead_inv % ell for c in s)


def _parse_relation(cur, depth, q):
    cur.expect_section("entries", depth)
    entries = []
    while cur.at_section("entry", depth + 1):
        cur.expect_section("entry", depth + 1)
        ell = _parse_int(cur.expect_value("ell", depth + 2), cur.pos)
        rpoly = tuple(_parse_int_list(cur.expect_value("rpoly", depth + 2), cur.pos))
        conj = _parse_int(cur.expect_value("conjugate", depth + 2), cur.pos)
        expo = _parse_int(cur.expect_value("exponent", depth + 2), cur.pos)
        prime = PrimeOverL(ell, rpoly)
        if conj not in (0, 1) or conj != _conj_flag(prime, q):
            raise ParseError("conjugate flag does not match the polynomial", line=cur.pos)
        entries.append((prime, expo))
    cur.expect_section("meta", depth)
    meta = []
    while cur.at_depth(depth + 1):
        row = cur.take()
        if row[1] != depth + 1 or row[3] == "":
            raise ParseError("expected 'key: value' inside meta", line=row[0])
        meta.append((row[2], _parse_int(row[3], row[0])))
    return Relation(entries=tuple(entries), meta=tuple(sorted(meta)))


# ---------------------------------------------------------------------------
# Certificates


def dumps_certificate(cert):
    lines = [CERT_TAG]
    _emit_field(lines, 0, cert.field_desc)
    _emit(lines, 0, "u")
    _emit(lines, 1, "hnf", _ints(_hnf_flat(cert.u.hnf)))
    _emit(lines, 0, "v")
    _emit(lines, 1, "hnf", _ints(_hnf_flat(cert.v.hnf)))
    _emit(lines, 0, "relations")
    for (prime_hnf, k), rel in cert.relations:
        _emit(lines, 1, "relation")
        _emit(lines, 2, "prime-hnf", _ints(_hnf_flat(prime_hnf)))
        _emit(lines, 2, "power", k)
        _emit_relation(lines, 2, rel, cert.field_desc[0])
    return "\n".join(lines) + "\n"


def loads_certificate(text, ctx=None):
    return _loads_certificate_body(text, ctx)


def _split_tag(text, expected):
    lines = text.splitlines()
    if not lines or lines[0].strip() != expected:
        raise ParseError(f"missing version tag {expected}", line=1)
    return "\n".join(lines[1:])


def _loads_certificate_body(text, ctx):
    from .endoring import Certificate
    from .field_core import build_weil_context

    body = _split_tag(text, CERT_TAG)
    cur = _Cursor(body)
    field_desc = _parse_field(cur, 0)
    if ctx is None:
        ctx = build_weil_context(*field_desc)
    elif (ctx.q, ctx.a1, ctx.a2) != field_desc:
        raise ParseError("certificate field does not match the context")
    cur.expect_section("u", 0)
    u = _parse_ofideal_hnf(cur, 1, ctx)
    cur.expect_section("v", 0)
    v = _parse_ofideal_hnf(cur, 1, ctx)
    cur.expect_section("relations", 0)
    rels = []
    while cur.at_section("relation", 1):
        cur.expect_section("relation", 1)
        flat = _parse_int_list(cur.expect_value("prime-hnf", 2), cur.pos, count=4)
        k = _parse_int(cur.expect_value("power", 2), cur.pos)
        rel = _parse_relation(cur, 2, field_desc[0])
        rels.append((((flat[0], flat[1]), (flat[2], flat[3])), k, rel))
    cur.done()
    relations = tuple((((hnf), k), rel) for hnf, k, rel in rels)
    return Certificate(u=u, v=v, field_desc=field_desc, relations=relations)


def _parse_ofideal_hnf(cur, depth, ctx):
    flat = _parse_int_list(cur.expect_value("hnf", depth), cur.pos, count=4)
    return OFIdeal(ctx, [[flat[0], flat[1]], [flat[2], flat[3]]])


# ---------------------------------------------------------------------------
# O_F ideals


def dumps_ofideal(ideal):
    ctx = ideal.ctx
    lines = [IDEAL_TAG]
    _emit_field(lines, 0, ctx)
    _emit(lines, 0, "hnf", _ints(_hnf_flat(ideal.hnf)))
    _emit(lines, 0, "norm", ideal.norm)
    return "\n".join(lines) + "\n"


def loads_ofideal(text, ctx=None):
    from .field_core import build_weil_context

    body = _split_tag(text, IDEAL_TAG)
    cur = _Cursor(body)
    field_desc = _parse_field(cur, 0)
    if ctx is None:
        ctx = build_weil_context(*field_desc)
    flat = _parse_int_list(cur.expect_value("hnf", 0), cur.pos, count=4)
    norm = _parse_int(cur.expect_value("norm", 0), cur.pos)
    cur.done()
    ideal = OFIdeal(ctx, [[flat[0], flat[1]], [flat[2], flat[3]]])
    if ideal.norm != norm:
        raise ParseError("stated norm does not match the lattice")
    return ideal


# ---------------------------------------------------------------------------
# Requirements reports


def dumps_report(report, ctx):
    lines = [REPORT_TAG]
    _emit_field(lines, 0, ctx)
    for name in ("ordinary", "irreducible", "units_equal", "narrow_class_one", "odd_conductor_gap"):
        _emit(lines, 0, name, int(getattr(report, name)))
    _emit(lines, 0, "messages")
    for msg in report.messages:
        _emit(lines, 1, "message", msg)
    return "\n".join(lines) + "\n"


def loads_report(text):
    from .field_core import RequirementsReport

    body = _split_tag(text, REPORT_TAG)
    cur = _Cursor(body)
    field_desc = _parse_field(cur, 0)
    flags = {}
    for name in ("ordinary", "irreducible", "units_equal", "narrow_class_one", "odd_conductor_gap"):
        flags[name] = bool(_parse_int(cur.expect_value(name, 0), cur.pos))
    cur.expect_section("messages", 0)
    msgs = []
    while cur.at_depth(1):
        row = cur.take()
        if row[2] != "message":
            raise ParseError("expected 'message:' entries", line=row[0])
        msgs.append(row[3])
    cur.done()
    return RequirementsReport(messages=tuple(msgs), **flags), field_desc


# ---------------------------------------------------------------------------
# Class-group cache


def classgroup_payload(G):
    """Stable dictionary describing a computed class group."""
    den, rows = _order_key(G.order_ref)
    return {
        "order_den": den,
        "order_rows": rows,
        "bound": G.bound,
        "seed": G.seed,
        "base": [(p.ell, tuple(p.rpoly)) for p in G.factor_base],
        "relations": [list(r) for r in G.relation_lattice],
        "snf": list(G.snf),
        "dlog": [list(r) for r in G.dlog_basis],
        "h": G.h,
    }


def _order_key(order):
    from . import linalg

    den, rows = linalg.scale_to_int([list(r) for r in order.basis])
    return den, [list(r) for r in rows]


def dumps_classgroup(G, ctx):
    p = classgroup_payload(G)
    lines = [CLASSGROUP_TAG]
    _emit_field(lines, 0, ctx)
    _emit(lines, 0, "order-den", p["order_den"])
    _emit(lines, 0, "order-rows", _ints([x for row in p["order_rows"] for x in row]))
    _emit(lines, 0, "bound", p["bound"])
    _emit(lines, 0, "seed", p["seed"])
    _emit(lines, 0, "h", p["h"])
    _emit(lines, 0, "snf", _ints(p["snf"]))
    _emit(lines, 0, "base")
    for ell, rpoly in p["base"]:
        _emit(lines, 1, "prime")
        _emit(lines, 2, "ell", ell)
        _emit(lines, 2, "rpoly", _ints(rpoly))
    _emit(lines, 0, "relations")
    for row in p["relations"]:
        _emit(lines, 1, "row", _ints(row))
    _emit(lines, 0, "dlog")
    for row in p["dlog"]:
        _emit(lines, 1, "row", _ints(row))
    return "\n".join(lines) + "\n"


def loads_classgroup_text(text, ctx):
    from .classgroup import ClassGroupData
    from .orders import Order
    from fractions import Fraction

    body = _split_tag(text, CLASSGROUP_TAG)
    cur = _Cursor(body)
    field_desc = _parse_field(cur, 0)
    if (ctx.q, ctx.a1, ctx.a2) != field_desc:
        raise ParseError("class-group cache belongs to a different field")
    den = _parse_int(cur.expect_value("order-den", 0), cur.pos)
    flat = _parse_int_list(cur.expect_value("order-rows", 0), cur.pos, count=16)
    bound = _parse_int(cur.expect_value("bound", 0), cur.pos)
    seed = _parse_int(cur.expect_value("seed", 0), cur.pos)
    h = _parse_int(cur.expect_value("h", 0), cur.pos)
    snf = _parse_int_list(cur.expect_value("snf", 0), cur.pos)
    cur.expect_section("base", 0)
    base = []
    while cur.at_section("prime", 1):
        cur.expect_section("prime", 1)
        ell = _parse_int(cur.expect_value("ell", 2), cur.pos)
        rpoly = tuple(_parse_int_list(cur.expect_value("rpoly", 2), cur.pos))
        base.append(PrimeOverL(ell, rpoly))
    cur.expect_section("relations", 0)
    relations = []
    while cur.at_depth(1) and cur.peek()[2] == "row":
        row = cur.take()
        relations.append(_parse_int_list(row[3], row[0], count=len(base)))
    cur.expect_section("dlog", 0)
    dlog = []
    while cur.at_depth(1) and cur.peek()[2] == "row":
        row = cur.take()
        dlog.append(_parse_int_list(row[3], row[0], count=len(base)))
    cur.done()
    rows = [flat[i * 4 : (i + 1) * 4] for i in range(4)]
    order = Order(ctx, [[Fraction(x, den) for x in row] for row in rows], check=False)
    G = ClassGroupData(
        order_ref=order,
        factor_base=base,
        relation_lattice=relations,
        snf=snf,
        dlog_basis=dlog,
        h=h,
        bound=bound,
        seed=seed,
    )
    return G


def classgroup_cache_name(ctx, order, bound, seed):
    den, rows = _order_key(order)
    blob = f"{ctx.q},{ctx.a1},{ctx.a2}|{den}|{rows}|{bound}|{seed}".encode()
    return "cg_" + hashlib.blake2b(blob, digest_size=12).hexdigest() + ".txt"


def dump_classgroup(G, path):
    with open(path, "w") as fh:
        fh.write(dumps_classgroup(G, G.order_ref.ctx))


def load_classgroup(path, tower, order, bound, seed):
    with open(path) as fh:
        G = loads_classgroup_text(fh.read(), tower.ctx)
    if G.bound != bound or G.seed != seed or G.order_ref.basis != order.basis:
        return None
    GG = G
    GG.meta["undesirable"] = tuple(sorted(tower.undesirable))
    GG.meta["cached"] = 1
    return GG
