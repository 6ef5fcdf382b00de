import random

from gmpy2 import mpq

from tincalc.fastinner import (
    clique_sigma,
    edge_term_sum_fast,
    inner_product_fast,
)
from tincalc.field import ntt_friendly_primes, rat_to_fp
from tincalc.geom import (
    build_edge_data,
    generate_valid_pair,
    normalize_pair,
)
from tincalc.integrate import naive_edge_term_sum, naive_inner_product
from tincalc.sympoly import WedgeLines, wedge_integral_monomial

from conftest import square_ne, square_nw

PRIME = ntt_friendly_primes(1, bits=31, two_adicity=16)[0]

MONOS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
GROUPS = {
    "difference": ((-1, "phi", "phi"),),
    "expanded": ((1, "u", "l"), (1, "l", "u"), (-1, "u", "u"), (-1, "l", "l")),
}


def kappa(F, G):
    return (
        F[0] * G[0],
        F[0] * G[1] + F[1] * G[0],
        F[0] * G[2] + F[2] * G[0],
        F[1] * G[1],
        F[1] * G[2] + F[2] * G[1],
        F[2] * G[2],
    )


def naive_pair_value(red, blue, red_higher, mode):
    """Exact rational oracle for one crossing pair, via the wedge formula."""
    s1, y1, tri1 = red
    s2, y2, tri2 = blue
    if red_higher:
        lines = WedgeLines(y1, s1, y2, s2)
    else:
        lines = WedgeLines(y2, s2, y1, s1)
    w = [wedge_integral_monomial(lines, i, j) for i, j in MONOS]
    total = mpq(0)
    for sign, vk, wk in GROUPS[mode]:
        ks = kappa(tri1[vk], tri2[wk])
        total += sign * sum(k * wv for k, wv in zip(ks, w))
    return total


def rand_triple(rng):
    return tuple(mpq(rng.randrange(-9, 10), rng.randrange(1, 6)) for _ in range(3))


def rand_items(rng, count, slope_lo, slope_hi):
    items = []
    for _ in range(count):
        s = mpq(rng.randrange(slope_lo * 12, slope_hi * 12), 12)
        y = mpq(rng.randrange(-24, 25), rng.randrange(1, 7))
        u = rand_triple(rng)
        l = rand_triple(rng)
        phi = tuple(a - b for a, b in zip(u, l))
        items.append((s, y, {"u": u, "l": l, "phi": phi}))
    return items


def oracle_clique(red_items, blue_items, red_higher, mode):
    total = mpq(0)
    for r in red_items:
        for b in blue_items:
            total += naive_pair_value(r, b, red_higher, mode)
    return total


def test_single_pair_matches_wedge_oracle():
    rng = random.Random(100)
    for trial in range(6):
        red = rand_items(rng, 1, 2, 5)
        blue = rand_items(rng, 1, -2, 1)
        for mode in ("difference", "expanded"):
            want = rat_to_fp(oracle_clique(red, blue, True, mode), PRIME)
            got = clique_sigma(red, blue, True, PRIME, mode=mode)
            assert got == want, (trial, mode)


def test_reversed_orientation_single_pair():
    rng = random.Random(200)
    red = rand_items(rng, 1, -3, -1)
    blue = rand_items(rng, 1, 2, 4)
    want = rat_to_fp(oracle_clique(red, blue, False, "difference"), PRIME)
    got = clique_sigma(red, blue, False, PRIME)
    assert got == want


def test_random_clique_both_paths_match_double_sum():
    rng = random.Random(321)
    red = rand_items(rng, 20, 3, 6)
    blue = rand_items(rng, 20, -2, 2)
    want_q = oracle_clique(red, blue, True, "difference")
    want = rat_to_fp(want_q, PRIME)
    direct = clique_sigma(red, blue, True, PRIME, force="direct")
    pipeline = clique_sigma(red, blue, True, PRIME, force="pipeline")
    assert direct == want
    assert pipeline == want


def test_grid_term_equivalence_36_vs_9():
    rng = random.Random(77)
    for _ in range(3):
        red = rand_items(rng, 9, 2, 5)
        blue = rand_items(rng, 7, -3, 1)
        for force in ("direct", "pipeline"):
            a = clique_sigma(red, blue, True, PRIME, mode="difference", force=force)
            b = clique_sigma(red, blue, True, PRIME, mode="expanded", force=force)
            assert a == b


def test_empty_sides_are_zero():
    rng = random.Random(5)
    red = rand_items(rng, 3, 2, 4)
    assert clique_sigma(red, [], True, PRIME) == 0
    assert clique_sigma([], red, True, PRIME) == 0


def test_edge_sum_fast_equals_naive_edge_sum():
    for n, seed in ((8, 1), (16, 4), (32, 9)):
        f, g = generate_valid_pair(n, seed=seed)
        fn, gn, _ = normalize_pair(f, g, seed=seed + 3)
        fe = build_edge_data(fn)
        ge = build_edge_data(gn)
        want = naive_edge_term_sum(fn, gn, fe, ge)
        got = edge_term_sum_fast(fn, gn, fe, ge, threads=1)
        assert got == want, (n, seed)


def test_edge_sum_modes_and_prime_sizes_agree():
    f, g = generate_valid_pair(16, seed=33)
    fn, gn, _ = normalize_pair(f, g, seed=35)
    base = edge_term_sum_fast(fn, gn, threads=1)
    assert edge_term_sum_fast(fn, gn, mode="expanded", threads=1) == base
    assert edge_term_sum_fast(fn, gn, prime_bits=29, threads=1) == base
    assert edge_term_sum_fast(fn, gn, initial_primes=3, threads=1) == base


def test_inner_product_fast_analytic(xy_pair):
    f, g = xy_pair
    assert inner_product_fast(f, g, threads=1) == mpq(1, 4)
    ones = square_ne("plane:1,0,0"), square_nw("plane:1,0,0")
    assert inner_product_fast(*ones, threads=1) == 1


def test_inner_product_fast_equals_naive_random():
    for n, seed in ((8, 2), (16, 11), (24, 5), (32, 17)):
        f, g = generate_valid_pair(n, seed=seed)
        fast = inner_product_fast(f, g, validate=False, threads=1)
        assert fast == naive_inner_product(f, g), (n, seed)


def test_inner_product_fast_validates():
    import pytest

    from tincalc.errors import DegenerateInput
    from conftest import square_fan

    with pytest.raises(DegenerateInput):
        inner_product_fast(square_ne(), square_fan(), threads=1)
