"""Segment intersection, in the clear and against an encrypted peer.

The orientation of three points ``(a, b, c)`` is the sign of

    d = (b.y - a.y) * (c.x - b.x) - (b.x - a.x) * (c.y - b.y)

with ``d > 0`` clockwise, ``d < 0`` counterclockwise and ``d == 0``
collinear. Two segments intersect when each one's endpoints straddle the
other's supporting line, or, if all four triplets are collinear, when some
endpoint lies on the other segment. Touching endpoints count.

In the encrypted variants Alice's points are plain :class:`Point` tuples and
Bob's are :class:`EncPoint` tuples of ciphertexts under his key.
"""
from __future__ import annotations

from enum import IntEnum
from typing import NamedTuple, Sequence, Union

from . import paillier as he
from .paillier import Ciphertext
from .subprotocols import ProtocolCtx, secure_leq, secure_mult, secure_sign

COORD_BITS = 32


class Point(NamedTuple):
    x: int
    y: int


class EncPoint(NamedTuple):
    x: Ciphertext
    y: Ciphertext


AnyPoint = Union[Point, EncPoint]


class Segment(NamedTuple):
    p: AnyPoint
    q: AnyPoint


class Orientation(IntEnum):
    COUNTERCLOCKWISE = -1
    COLLINEAR = 0
    CLOCKWISE = 1


def check_coord(v: int) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise TypeError(f"coordinates must be integers, got {v!r}")
    if abs(v) >= 1 << COORD_BITS:
        raise ValueError(f"coordinate {v} exceeds the {COORD_BITS}-bit bound")
    return v


def segments(path: Sequence[AnyPoint]) -> list[Segment]:
    """Consecutive point pairs: k points give k - 1 segments."""
    return [Segment(path[i], path[i + 1]) for i in range(len(path) - 1)]


def _encrypted(p: AnyPoint) -> bool:
    return isinstance(p, EncPoint)


# -- plaintext oracle ---------------------------------------------------------

def orientation_plain(a: Point, b: Point, c: Point) -> Orientation:
    d = (b.y - a.y) * (c.x - b.x) - (b.x - a.x) * (c.y - b.y)
    return Orientation((d > 0) - (d < 0))


def on_segment_plain(p: Point, s: Segment) -> bool:
    """Bounding-box test; only meaningful when ``p`` is collinear with ``s``."""
    return (min(s.p.x, s.q.x) <= p.x <= max(s.p.x, s.q.x)
            and min(s.p.y, s.q.y) <= p.y <= max(s.p.y, s.q.y))


def intersect_plain(s1: Segment, s2: Segment) -> bool:
    a, b = s1
    c, d = s2
    o1 = orientation_plain(a, b, c)
    o2 = orientation_plain(a, b, d)
    o3 = orientation_plain(c, d, a)
    o4 = orientation_plain(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == o2 == o3 == o4 == Orientation.COLLINEAR:
        return (on_segment_plain(a, s2) or on_segment_plain(b, s2)
                or on_segment_plain(c, s1) or on_segment_plain(d, s1))
    return False


# -- encrypted evaluation -----------------------------------------------------

class _Linear:
    """``const + sum(coeff * Enc(v))`` collected before any exponentiation."""

    def __init__(self):
        self.const = 0
        self.terms: dict[Ciphertext, int] = {}

    def add(self, ct: Ciphertext, k: int = 1) -> None:
        self.terms[ct] = self.terms.get(ct, 0) + k

    def to_ciphertext(self, pk) -> Ciphertext:
        out = he.trivial(pk, self.const)
        for ct, k in self.terms.items():
            if k:
                out = he.add(pk, out, ct if k == 1 else he.scalar_mul(pk, ct, k))
        return out


def _cross_into(ctx: ProtocolCtx, acc: _Linear, p: AnyPoint, q: AnyPoint, sign: int, cache) -> None:
    """Accumulate ``sign * (p.x*q.y - p.y*q.x)`` into ``acc``."""
    pe, qe = _encrypted(p), _encrypted(q)
    if not pe and not qe:
        acc.const += sign * (p.x * q.y - p.y * q.x)
    elif pe and not qe:
        acc.add(p.x, sign * q.y)
        acc.add(p.y, -sign * q.x)
    elif qe and not pe:
        acc.add(q.y, sign * p.x)
        acc.add(q.x, -sign * p.y)
    else:
        if cache is not None and (q, p) in cache:
            ct, sign = cache[(q, p)], -sign
        elif cache is not None and (p, q) in cache:
            ct = cache[(p, q)]
        else:
            ct = he.sub(ctx.pk, secure_mult(ctx, p.x, q.y), secure_mult(ctx, p.y, q.x))
            if cache is not None:
                cache[(p, q)] = ct
        acc.add(ct, sign)


def _check_plain(*points: AnyPoint) -> None:
    for p in points:
        if not _encrypted(p):
            check_coord(p.x)
            check_coord(p.y)


def enc_determinant(ctx: ProtocolCtx, a: AnyPoint, b: AnyPoint, c: AnyPoint, cache=None) -> Ciphertext:
    """Encrypted orientation determinant of a mixed plain/encrypted triplet.

    Expanded as ``-(cross(a,b) + cross(b,c) + cross(c,a))`` so that only
    cross products of two encrypted points need the interactive
    multiplication; ``cache`` memoizes those across calls.
    """
    if ctx.t_max < 2 * COORD_BITS + 3:
        raise ValueError("t_max too small for determinants of bounded coordinates")
    _check_plain(a, b, c)
    pk = ctx.pk
    if _encrypted(a) and _encrypted(b) and _encrypted(c):
        dy1 = he.sub(pk, b.y, a.y)
        dx2 = he.sub(pk, c.x, b.x)
        dx1 = he.sub(pk, b.x, a.x)
        dy2 = he.sub(pk, c.y, b.y)
        return he.sub(pk, secure_mult(ctx, dy1, dx2), secure_mult(ctx, dx1, dy2))
    acc = _Linear()
    _cross_into(ctx, acc, a, b, -1, cache)
    _cross_into(ctx, acc, b, c, -1, cache)
    _cross_into(ctx, acc, c, a, -1, cache)
    return acc.to_ciphertext(pk)


def enc_orientation(ctx: ProtocolCtx, a: AnyPoint, b: AnyPoint, c: AnyPoint, cache=None) -> Orientation:
    if not (_encrypted(a) or _encrypted(b) or _encrypted(c)):
        return orientation_plain(a, b, c)
    return Orientation(secure_sign(ctx, enc_determinant(ctx, a, b, c, cache)))


def _within(ctx: ProtocolCtx, v, e1, e2) -> bool:
    """Is ``v`` between ``e1`` and ``e2`` (inclusive, either order)?"""
    plain = [not isinstance(t, Ciphertext) for t in (v, e1, e2)]
    if all(plain):
        return min(e1, e2) <= v <= max(e1, e2)
    if plain[1] and plain[2]:
        return secure_leq(ctx, min(e1, e2), v) and secure_leq(ctx, v, max(e1, e2))
    pk = ctx.pk
    as_ct = [t if isinstance(t, Ciphertext) else he.trivial(pk, t) for t in (v, e1, e2)]
    s1 = secure_sign(ctx, he.sub(pk, as_ct[0], as_ct[1]))
    s2 = secure_sign(ctx, he.sub(pk, as_ct[0], as_ct[2]))
    return s1 * s2 <= 0


def enc_on_segment(ctx: ProtocolCtx, p: AnyPoint, s: Segment) -> bool:
    _check_plain(p, s.p, s.q)
    return _within(ctx, p.x, s.p.x, s.q.x) and _within(ctx, p.y, s.p.y, s.q.y)


def enc_intersect(ctx: ProtocolCtx, sa: Segment, sb: Segment, cache=None) -> bool:
    """Decide whether Alice's segment ``sa`` meets Bob's encrypted ``sb``.

    Four blinded sign rounds in the general case; the collinear branch adds
    range checks and stops at the first endpoint found on the other segment.
    """
    a, b = sa
    c, d = sb
    if cache is None:
        cache = {}
    o1 = enc_orientation(ctx, a, b, c, cache)
    o2 = enc_orientation(ctx, a, b, d, cache)
    o3 = enc_orientation(ctx, c, d, a, cache)
    o4 = enc_orientation(ctx, c, d, b, cache)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == o2 == o3 == o4 == Orientation.COLLINEAR:
        return (enc_on_segment(ctx, a, sb) or enc_on_segment(ctx, b, sb)
                or enc_on_segment(ctx, c, sa) or enc_on_segment(ctx, d, sa))
    return False


def compare_paths(ctx: ProtocolCtx, pa: Sequence[Point], pb: Sequence[EncPoint]) -> set[int]:
    """Indices of Alice's segments that meet any of Bob's segments.

    Every (i, j) pair is evaluated, row-major, without early exit.
    """
    mine, theirs = segments(pa), segments(pb)
    cache: dict = {}
    hits = set()
    for i, sa in enumerate(mine):
        for sb in theirs:
            if enc_intersect(ctx, sa, sb, cache):
                hits.add(i)
    return hits
