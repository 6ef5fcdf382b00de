import math
import random

import pytest
from gmpy2 import mpq

from tincalc.cliques import build_clique_cover, verify_clique_cover
from tincalc.errors import DegenerateInput
from tincalc.geom import build_edge_data, generate_valid_pair, normalize_pair


def seg(x1, y1, x2, y2):
    return ((mpq(x1), mpq(y1)), (mpq(x2), mpq(y2)))


def interior_segments(t):
    out = []
    for e in build_edge_data(t):
        if not e.is_boundary:
            out.append((t.xy(e.u), t.xy(e.v)))
    return out


def pair_segments(n, seed):
    f, g = generate_valid_pair(n, seed=seed)
    fn, gn, _ = normalize_pair(f, g, seed=seed + 1)
    return interior_segments(fn), interior_segments(gn)


def test_single_crossing():
    fam = build_clique_cover([seg(0, 0, 2, 2)], [seg(0, 2, 2, 0)])
    assert len(fam.cliques) == 1
    c = fam.cliques[0]
    assert c.red == (0,) and c.blue == (0,)
    assert c.red_higher_slope  # slope 1 vs -1


def test_disjoint_pair_empty():
    fam = build_clique_cover([seg(0, 0, 1, 1)], [seg(3, 0, 4, 1)])
    assert fam.cliques == ()
    assert fam.pair_count() == 0


def test_crossing_at_shared_slab_boundary():
    # crossing exactly at x = 1, which is an endpoint x of a third segment
    red = [seg(0, 0, 2, 2)]
    blue = [seg(0, 2, 2, 0), seg(1, 5, 2, 6)]
    fam = build_clique_cover(red, blue)
    rep = verify_clique_cover(fam, red, blue)
    assert rep.ok, rep.problems
    assert fam.pair_count() == 1


def test_shared_endpoint_is_not_a_crossing():
    red = [seg(0, 0, 2, 2)]
    blue = [seg(0, 0, 2, 1)]  # shares the left endpoint with the red
    fam = build_clique_cover(red, blue)
    assert fam.pair_count() == 0


def test_vertex_on_edge_contact_raises():
    red = [seg(0, 0, 2, 2)]
    blue = [seg(1, 1, 3, 0)]  # blue endpoint interior to the red
    with pytest.raises(DegenerateInput):
        build_clique_cover(red, blue)


def test_random_segment_grid():
    rng = random.Random(5)
    # 50 random segments per color; same-color segments must not share
    # interior points (the precondition triangulation edges satisfy), so
    # candidates conflicting with accepted ones are resampled

    def crosses_or_touches(s1, s2):
        (a, b), (c, d) = s1, s2

        def orient(p, q, r):
            return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

        o1, o2 = orient(a, b, c), orient(a, b, d)
        o3, o4 = orient(c, d, a), orient(c, d, b)
        if o1 * o2 < 0 and o3 * o4 < 0:
            return True
        for oz, p, u, v in ((o1, c, a, b), (o2, d, a, b), (o3, a, c, d), (o4, b, c, d)):
            if oz == 0 and p != u and p != v and min(u[0], v[0]) <= p[0] <= max(
                u[0], v[0]
            ) and min(u[1], v[1]) <= p[1] <= max(u[1], v[1]):
                return True
        return False

    def batch(off):
        segs = []
        while len(segs) < 50:
            x1, y1 = rng.randrange(0, 64), rng.randrange(0, 64)
            x2, y2 = rng.randrange(0, 64), rng.randrange(0, 64)
            if x1 == x2:
                continue
            cand = seg(mpq(x1 + off, 7), mpq(y1, 3), mpq(x2 + off, 7), mpq(y2, 3))
            if any(crosses_or_touches(cand, s) for s in segs):
                continue
            segs.append(cand)
        return segs

    for attempt in range(20):
        red, blue = batch(0), batch(1)
        try:
            fam = build_clique_cover(red, blue)
        except DegenerateInput:
            continue
        rep = verify_clique_cover(fam, red, blue)
        assert rep.ok, rep.problems[:5]
        assert rep.crossing_pairs == fam.pair_count()
        assert rep.crossing_pairs > 50  # the instance is nontrivial
        return
    pytest.fail("never found a clean random instance")


def test_tin_pairs_verify():
    for n, s in ((8, 0), (16, 3), (32, 5), (64, 11)):
        red, blue = pair_segments(n, s)
        fam = build_clique_cover(red, blue)
        rep = verify_clique_cover(fam, red, blue)
        assert rep.ok, (n, s, rep.problems[:5])


def test_verify_flags_double_cover():
    red = [seg(0, 0, 2, 2)]
    blue = [seg(0, 2, 2, 0)]
    fam = build_clique_cover(red, blue)
    from tincalc.cliques import Clique, CliqueFamily

    doubled = CliqueFamily(fam.cliques + fam.cliques)
    rep = verify_clique_cover(doubled, red, blue)
    assert not rep.ok
    assert any("covered 2 times" in p for p in rep.problems)


def test_verify_flags_interleaved_slopes():
    # reds with slopes 1 and -1 both cross a horizontal blue, so neither
    # orientation of a joint clique can separate the slopes
    red = [seg(0, 0, 2, 2), seg(0, 2, 2, 0)]
    blue = [seg(mpq(1, 2), 1, mpq(3, 2), 1)]
    from tincalc.cliques import Clique, CliqueFamily

    bad = CliqueFamily((Clique((0, 1), (0,), red_higher_slope=True),))
    rep = verify_clique_cover(bad, red, blue)
    assert not rep.ok
    assert any("slope separation" in p for p in rep.problems)


def test_size_growth_trend():
    sizes = []
    for n in (64, 128, 256):
        red, blue = pair_segments(n, 17)
        fam = build_clique_cover(red, blue)
        e = len(red) + len(blue)
        sizes.append(fam.total_size() / (e * math.log2(e) ** 2))
    # normalized size must not blow up as n grows
    assert sizes[-1] <= sizes[0] * 1.5
