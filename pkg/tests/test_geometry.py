import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from privroute import paillier as he
from privroute.geometry import (
    EncPoint,
    Orientation,
    Point,
    Segment,
    compare_paths,
    enc_determinant,
    enc_intersect,
    enc_on_segment,
    enc_orientation,
    intersect_plain,
    on_segment_plain,
    orientation_plain,
    segments,
)
from privroute.session import loopback_pair


def parametric_intersect(s1, s2):
    """Independent oracle: exact rational parametric solve, no orientations."""
    (p, p2), (q, q2) = s1, s2
    r = (p2.x - p.x, p2.y - p.y)
    s = (q2.x - q.x, q2.y - q.y)
    qp = (q.x - p.x, q.y - p.y)
    cross = lambda u, v: u[0] * v[1] - u[1] * v[0]
    dot = lambda u, v: u[0] * v[0] + u[1] * v[1]

    def point_on(pt, a, b):
        ab, ap = (b.x - a.x, b.y - a.y), (pt.x - a.x, pt.y - a.y)
        return cross(ab, ap) == 0 and 0 <= dot(ap, ab) <= dot(ab, ab)

    if r == (0, 0) and s == (0, 0):
        return p == q
    if r == (0, 0):
        return point_on(p, q, q2)
    if s == (0, 0):
        return point_on(q, p, p2)
    denom = cross(r, s)
    if denom:
        t = Fraction(cross(qp, s), denom)
        u = Fraction(cross(qp, r), denom)
        return 0 <= t <= 1 and 0 <= u <= 1
    if cross(qp, r):
        return False
    rr = dot(r, r)
    t0 = Fraction(dot(qp, r), rr)
    t1 = t0 + Fraction(dot(s, r), rr)
    return max(min(t0, t1), 0) <= min(max(t0, t1), 1)


def encp(pk, p):
    return EncPoint(he.encrypt_signed(pk, p[0]), he.encrypt_signed(pk, p[1]))


def encseg(pk, s):
    return Segment(encp(pk, s[0]), encp(pk, s[1]))


def seg(x1, y1, x2, y2):
    return Segment(Point(x1, y1), Point(x2, y2))


coord = st.integers(min_value=-99, max_value=99)
point = st.builds(Point, coord, coord)
segment = st.builds(Segment, point, point)


# -- plaintext ----------------------------------------------------------------

@pytest.mark.parametrize("pts,expected", [
    (((0, 0), (1, 1), (2, 2)), Orientation.COLLINEAR),
    (((0, 0), (4, 4), (1, 2)), Orientation.COUNTERCLOCKWISE),
    (((0, 0), (4, 4), (2, 1)), Orientation.CLOCKWISE),
])
def test_orientation_examples(pts, expected):
    assert orientation_plain(*(Point(*p) for p in pts)) == expected


@pytest.mark.parametrize("s1,s2,expected", [
    (seg(0, 0, 10, 10), seg(0, 10, 10, 0), True),
    (seg(0, 0, 5, 0), seg(3, 0, 8, 0), True),
    (seg(0, 0, 2, 0), seg(3, 0, 5, 0), False),
    (seg(0, 0, 1, 1), seg(1, 1, 2, 0), True),
])
def test_intersect_examples(s1, s2, expected):
    assert intersect_plain(s1, s2) is expected
    assert parametric_intersect(s1, s2) is expected


def test_on_segment_bounding_box():
    s = seg(0, 0, 4, 2)
    assert on_segment_plain(Point(2, 1), s)
    assert not on_segment_plain(Point(5, 2), s)


def test_plain_oracle_matches_parametric_on_grid():
    pts = [Point(x, y) for x in range(5) for y in range(5)]
    segs = [Segment(a, b) for a in pts for b in pts]  # includes degenerate ones
    bad = [(s1, s2) for s1, s2 in itertools.product(segs, repeat=2)
           if intersect_plain(s1, s2) != parametric_intersect(s1, s2)]
    assert bad == []


@settings(max_examples=2000)
@given(s1=segment, s2=segment)
def test_plain_oracle_matches_parametric_random(s1, s2):
    assert intersect_plain(s1, s2) == parametric_intersect(s1, s2)


@settings(max_examples=1000)
@given(s1=segment, s2=segment)
def test_intersect_is_symmetric(s1, s2):
    assert intersect_plain(s1, s2) == intersect_plain(s2, s1)
    assert intersect_plain(s1, s2) == intersect_plain(Segment(s1.q, s1.p), s2)


@settings(max_examples=500)
@given(a=point, b=point, c=point)
def test_orientation_antisymmetry(a, b, c):
    assert orientation_plain(a, b, c) == -orientation_plain(a, c, b)
    assert orientation_plain(a, b, c) == orientation_plain(b, c, a)


def test_degenerate_segment_is_a_point():
    s = seg(0, 0, 4, 4)
    assert intersect_plain(seg(2, 2, 2, 2), s)
    assert not intersect_plain(seg(2, 3, 2, 3), s)
    assert not intersect_plain(seg(5, 5, 5, 5), s)


def test_segments_of_path():
    assert segments([Point(0, 0)]) == []
    assert segments([Point(0, 0), Point(1, 0), Point(1, 1)]) == [seg(0, 0, 1, 0), seg(1, 0, 1, 1)]


# -- encrypted ----------------------------------------------------------------

def test_determinant_plain_plain_enc_needs_no_mult(lp, pk, sk):
    d = enc_determinant(lp.alice, Point(0, 0), Point(4, 4), encp(pk, (1, 2)))
    assert he.decrypt_signed(sk, d) == -4
    assert lp.alice.mult_calls == 0


def test_determinant_plain_enc_enc_needs_two_mults(lp, pk, sk):
    c, d = encp(pk, (0, 10)), encp(pk, (10, 0))
    det = enc_determinant(lp.alice, c, d, Point(0, 0))
    assert he.decrypt_signed(sk, det) == (0 - 10) * (0 - 10) - (10 - 0) * (0 - 0)
    assert lp.alice.mult_calls == 2
    # the cached cross term is reused for the second orientation
    cache: dict = {}
    enc_determinant(lp.alice, c, d, Point(0, 0), cache)
    enc_determinant(lp.alice, c, d, Point(5, 5), cache)
    assert lp.alice.mult_calls == 4


def test_determinant_all_encrypted(lp, pk, sk):
    det = enc_determinant(lp.alice, encp(pk, (0, 0)), encp(pk, (4, 4)), encp(pk, (2, 1)))
    assert he.decrypt_signed(sk, det) == 4


def test_enc_orientation_matches_plain(keypair):
    pk = keypair[0]
    rng = random.Random(3)
    rp = lambda: Point(rng.randint(-99, 99), rng.randint(-99, 99))
    with loopback_pair(keypair) as pair:
        for i in range(500):
            a, b, c = rp(), rp(), rp()
            if i % 5 == 0:
                b = Point(2 * a.x - c.x, 2 * a.y - c.y)  # collinear triplet
            mask = [i % 3 == 0, i % 3 != 2, True]
            args = [encp(pk, p) if m else p for p, m in zip((a, b, c), mask)]
            assert enc_orientation(pair.alice, *args) == orientation_plain(a, b, c)


def test_enc_orientation_all_plain_is_local(lp):
    assert enc_orientation(lp.alice, Point(0, 0), Point(1, 1), Point(2, 2)) == Orientation.COLLINEAR
    assert lp.alice.sign_calls == 0


@pytest.mark.parametrize("sa,sb,expected", [
    (seg(0, 0, 10, 10), seg(0, 10, 10, 0), True),
    (seg(0, 0, 1, 0), seg(5, 5, 6, 6), False),
    (seg(0, 0, 1, 1), seg(1, 1, 2, 0), True),
    (seg(0, 0, 5, 0), seg(3, 0, 8, 0), True),
    (seg(0, 0, 2, 0), seg(3, 0, 5, 0), False),
    (seg(2, 2, 2, 2), seg(0, 0, 4, 4), True),
    (seg(0, 0, 4, 4), seg(2, 3, 2, 3), False),
    (seg(3, 3, 3, 3), seg(3, 3, 3, 3), True),
])
def test_enc_intersect_examples(lp, pk, sa, sb, expected):
    assert enc_intersect(lp.alice, sa, encseg(pk, sb)) is expected


def test_enc_intersect_operation_budget(lp, pk):
    enc_intersect(lp.alice, seg(0, 0, 10, 10), encseg(pk, seg(0, 10, 10, 0)))
    assert lp.alice.sign_calls == 4
    assert lp.alice.mult_calls <= 4


def test_enc_intersect_collinear_branch_only_when_all_collinear(lp, pk):
    enc_intersect(lp.alice, seg(0, 0, 2, 0), encseg(pk, seg(0, 1, 2, 1)))
    assert lp.alice.sign_calls == 4
    enc_intersect(lp.alice, seg(0, 0, 2, 0), encseg(pk, seg(3, 0, 5, 0)))
    assert lp.alice.sign_calls > 8


def test_enc_on_segment_both_sides(lp, pk):
    a = lp.alice
    assert enc_on_segment(a, encp(pk, (2, 0)), seg(0, 0, 5, 0))
    assert not enc_on_segment(a, encp(pk, (6, 0)), seg(0, 0, 5, 0))
    assert enc_on_segment(a, Point(2, 0), encseg(pk, seg(5, 0, 0, 0)))
    assert not enc_on_segment(a, Point(-1, 0), encseg(pk, seg(5, 0, 0, 0)))


def test_enc_intersect_spot_suite(keypair):
    pk = keypair[0]
    rng = random.Random(50)
    rp = lambda: Point(rng.randint(-99, 99), rng.randint(-99, 99))
    pairs = [(Segment(rp(), rp()), Segment(rp(), rp())) for _ in range(40)]
    # force some collinear and touching cases into the mix
    pairs += [(seg(0, 0, 4, 0), seg(4, 0, 9, 0)), (seg(-5, -5, 5, 5), seg(6, 6, 9, 9)),
              (seg(1, 1, 1, 8), seg(1, 3, 1, 5)), (seg(0, 0, 0, 0), seg(0, 0, 3, 3)),
              (seg(7, 2, 7, 2), seg(0, 0, 3, 3)), (seg(-9, 0, 9, 0), seg(0, -9, 0, 0)),
              (seg(10, 10, 20, 20), seg(20, 20, 10, 10)), (seg(0, 0, 3, 1), seg(6, 2, 9, 3)),
              (seg(0, 0, 99, 1), seg(1, 0, 98, 1)), (seg(-99, -99, 99, 99), seg(-99, 99, 99, -99))]
    with loopback_pair(keypair) as pair:
        for sa, sb in pairs:
            assert enc_intersect(pair.alice, sa, encseg(pk, sb)) == intersect_plain(sa, sb), (sa, sb)


def test_compare_paths(lp, pk):
    alice = [Point(0, 0), Point(10, 0), Point(10, 10), Point(20, 10)]
    bob = [Point(5, -5), Point(5, 5), Point(15, 5), Point(15, 20)]
    expected = {i for i, sa in enumerate(segments(alice))
                if any(intersect_plain(sa, sb) for sb in segments(bob))}
    got = compare_paths(lp.alice, alice, [encp(pk, p) for p in bob])
    assert got == expected == {0, 1, 2}
    # row-major with no early exit: 9 pairs, 4 signs each at least
    assert lp.alice.sign_calls >= 9 * 4


def test_rejects_out_of_bound_plain_coords(lp, pk):
    with pytest.raises(ValueError):
        enc_orientation(lp.alice, Point(1 << 32, 0), Point(0, 0), encp(pk, (1, 1)))
