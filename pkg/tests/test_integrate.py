import random

import pytest
from gmpy2 import mpq

from tincalc.errors import DegenerateInput
from tincalc.geom import (
    LinearFunc,
    build_edge_data,
    generate_valid_pair,
    normalize_pair,
)
from tincalc.integrate import (
    clip_triangles,
    integrate_product_over_triangle,
    naive_edge_term_sum,
    naive_inner_product,
    vertex_term_sum,
)

from conftest import square_fan, square_ne, square_nw, tin_from


def q(*args):
    return tuple(mpq(a) for a in args)


def test_clip_identical():
    t = (q(0, 0), q(1, 0), q(0, 1))
    got = clip_triangles(t, t)
    assert sorted(got) == sorted(t)


def test_clip_disjoint():
    t1 = (q(0, 0), q(1, 0), q(0, 1))
    t2 = (q(5, 5), q(6, 5), q(5, 6))
    assert clip_triangles(t1, t2) == []


def test_clip_touching_reports_empty():
    t1 = (q(0, 0), q(1, 0), q(0, 1))
    t2 = (q(1, 0), q(2, 0), q(1, 1))  # shares one vertex only
    assert clip_triangles(t1, t2) == []


def test_clip_opposite_diagonal_halves():
    # lower halves from the two diagonals of the unit square
    t1 = (q(0, 0), q(1, 0), q(1, 1))
    t2 = (q(0, 0), q(1, 0), q(0, 1))
    cell = clip_triangles(t1, t2)
    area2 = sum(
        (cell[k][0] - cell[0][0]) * (cell[k + 1][1] - cell[0][1])
        - (cell[k][1] - cell[0][1]) * (cell[k + 1][0] - cell[0][0])
        for k in range(1, len(cell) - 1)
    )
    assert area2 == mpq(1, 2)  # area 1/4


def test_midpoint_rule_cases():
    one = LinearFunc(mpq(1), mpq(0), mpq(0))
    fx = LinearFunc(mpq(0), mpq(1), mpq(0))
    fy = LinearFunc(mpq(0), mpq(0), mpq(1))
    tri = (q(0, 0), q(1, 0), q(0, 1))
    assert integrate_product_over_triangle(one, one, tri) == mpq(1, 2)
    assert integrate_product_over_triangle(fx, fy, tri) == mpq(1, 24)
    assert integrate_product_over_triangle(fy, fx, tri) == mpq(1, 24)


def test_naive_analytic_values(xy_pair):
    f, g = xy_pair
    assert naive_inner_product(f, g) == mpq(1, 4)
    ones = square_ne("plane:1,0,0"), square_nw("plane:1,0,0")
    assert naive_inner_product(*ones) == 1


def test_naive_symmetry_and_linearity():
    f, g = generate_valid_pair(12, seed=3)
    assert naive_inner_product(f, g) == naive_inner_product(g, f)
    scaled = tin_from(
        [(x, y) for x, y, _z in f.vertices],
        f.triangles,
        "plane:0,0,0",
    )
    # scale heights by 3/2 directly
    from tincalc.geom import Tin

    scaled = Tin(
        tuple((x, y, mpq(3, 2) * z) for x, y, z in f.vertices),
        f.triangles,
        f.domain,
    )
    assert naive_inner_product(scaled, g) == mpq(3, 2) * naive_inner_product(f, g)


def test_single_crossing_split(xy_pair):
    f, g = xy_pair
    fn, gn, _ = normalize_pair(f, g, seed=2)
    sv = vertex_term_sum(fn, gn)
    se = naive_edge_term_sum(fn, gn)
    assert sv + se == mpq(1, 4)


def test_edge_term_zero_without_crossings():
    # both tins split by the same lattice of two vertical strips is not
    # constructible without overlap; instead check that a pair whose only
    # interior edges cross exactly once yields naive - vertex = edge term
    f, g = square_ne(), square_nw()
    fn, gn, _ = normalize_pair(f, g, seed=5)
    se = naive_edge_term_sum(fn, gn)
    assert se == naive_inner_product(fn, gn) - vertex_term_sum(fn, gn)


def test_four_cell_terms_match_difference_form():
    rng = random.Random(8)
    for seed in range(4):
        f, g = generate_valid_pair(10, seed=seed + 40)
        fn, gn, _ = normalize_pair(f, g, seed=seed)
        f_edges = [e for e in build_edge_data(fn) if not e.is_boundary]
        g_edges = [e for e in build_edge_data(gn) if not e.is_boundary]
        from tincalc.integrate import MONOMIALS, _crossing_term, _product_monomial_coeffs, _wedge_values
        from tincalc.geom import LinearFunc as LF

        checked = 0
        for ef in f_edges:
            for eg in g_edges:
                p1, p2 = fn.xy(ef.u), fn.xy(ef.v)
                q1, q2 = gn.xy(eg.u), gn.xy(eg.v)
                o = lambda a, b, c: (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (
                    c[0] - a[0]
                )
                if o(p1, p2, q1) * o(p1, p2, q2) < 0 and o(q1, q2, p1) * o(
                    q1, q2, p2
                ) < 0:
                    four = _crossing_term(ef, eg)
                    dF = LF(
                        ef.upper_func.a - ef.lower_func.a,
                        ef.upper_func.b - ef.lower_func.b,
                        ef.upper_func.c - ef.lower_func.c,
                    )
                    dG = LF(
                        eg.upper_func.a - eg.lower_func.a,
                        eg.upper_func.b - eg.lower_func.b,
                        eg.upper_func.c - eg.lower_func.c,
                    )
                    w = _wedge_values((ef.y0, ef.s), (eg.y0, eg.s))
                    coeffs = _product_monomial_coeffs(dF, dG)
                    diff_form = -sum(c * wv for c, wv in zip(coeffs, w))
                    assert four == diff_form
                    checked += 1
        assert checked > 0


def test_decomposition_identity_random_pairs():
    for n, seed in ((8, 0), (8, 5), (16, 1), (16, 9), (24, 2), (32, 7)):
        f, g = generate_valid_pair(n, seed=seed)
        fn, gn, _ = normalize_pair(f, g, seed=seed + 100)
        naive = naive_inner_product(fn, gn)
        sv = vertex_term_sum(fn, gn)
        se = naive_edge_term_sum(fn, gn)
        assert sv + se == naive, (n, seed)


def test_vertex_term_symmetric_in_roles():
    f, g = generate_valid_pair(16, seed=77)
    fn, gn, _ = normalize_pair(f, g, seed=8)
    assert vertex_term_sum(fn, gn) == vertex_term_sum(gn, fn)


def test_edge_term_degenerate_contact_raises():
    f = square_ne()
    g = square_fan()  # center vertex sits on f's diagonal
    fn, gn, _ = normalize_pair(f, g, seed=1)
    with pytest.raises(DegenerateInput):
        naive_edge_term_sum(fn, gn)
