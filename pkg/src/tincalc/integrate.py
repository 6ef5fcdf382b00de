"""Overlay integration: the quadratic oracle and the vertex/edge split.

naive_inner_product is the independent reference for everything else in
the package: it clips all triangle pairs (Sutherland-Hodgman) and applies
the degree-2 exact midpoint rule, sharing no machinery with the wedge
based fast path.

vertex_term_sum and naive_edge_term_sum realize the decomposition of the
overlay integral into terms anchored at original vertices and at edge
crossings; their sum must equal the oracle exactly on every general
position pair, which is the package's central internal identity.
"""

from __future__ import annotations

import math
from functools import cmp_to_key

from gmpy2 import mpq

from . import counting
from .errors import DegenerateInput
from .geom import Tin, build_edge_data, triangle_funcs
from .locate import EDGE, OUTSIDE, TRIANGLE, VERTEX, batch_locate
from .sympoly import WedgeLines, wedge_integral_monomial, wedge_numerator_P

MONOMIALS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def _orient(a, b, c):
    counting.add("rat", 7)
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def clip_triangles(t1, t2):
    """Exact intersection of two CCW triangles as a CCW polygon.

    Returns [] when the intersection is empty or has zero area.
    """
    poly = list(t2)
    for k in range(3):
        a, b = t1[k], t1[(k + 1) % 3]
        if not poly:
            return []
        out = []
        prev = poly[-1]
        prev_side = _orient(a, b, prev)
        counting.add("rat", 2 * len(poly))  # sign tests are unit-cost too
        for cur in poly:
            side = _orient(a, b, cur)
            if side >= 0:
                if prev_side < 0:
                    out.append(_line_segment_point(a, b, prev, cur))
                out.append(cur)
            elif prev_side > 0:
                out.append(_line_segment_point(a, b, prev, cur))
            prev, prev_side = cur, side
        poly = out
    cleaned = []
    counting.add("rat", 2 * len(poly))
    for p in poly:
        if not cleaned or p != cleaned[-1]:
            cleaned.append(p)
    while len(cleaned) > 1 and cleaned[0] == cleaned[-1]:
        cleaned.pop()
    if len(cleaned) < 3:
        return []
    area2 = mpq(0)
    for k in range(1, len(cleaned) - 1):
        area2 += _orient(cleaned[0], cleaned[k], cleaned[k + 1])
    counting.add("rat", len(cleaned))
    if area2 == 0:
        return []
    return cleaned


def _line_segment_point(a, b, p, q):
    """Intersection of line (a, b) with segment (p, q) crossing it."""
    d1 = _orient(a, b, p)
    d2 = _orient(a, b, q)
    counting.add("rat", 8)
    t = d1 / (d1 - d2)
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def integrate_product_over_triangle(f, g, tri):
    """Exact integral of f*g over a triangle via the 3-midpoint rule.

    f*g has total degree two, for which the edge-midpoint rule is exact.
    """
    a, b, c = tri
    area2 = _orient(a, b, c)
    counting.add("rat", 41)
    total = mpq(0)
    for p, q in ((a, b), (b, c), (c, a)):
        mx, my = (p[0] + q[0]) / 2, (p[1] + q[1]) / 2
        total += f(mx, my) * g(mx, my)
    return area2 / 6 * total


def naive_inner_product(f: Tin, g: Tin) -> mpq:
    """The quadratic oracle: clip every triangle pair and integrate."""
    f_funcs = triangle_funcs(f)
    g_funcs = triangle_funcs(g)
    f_tris = [tuple(f.xy(i) for i in tri) for tri in f.triangles]
    g_tris = [tuple(g.xy(i) for i in tri) for tri in g.triangles]
    total = mpq(0)
    for fi, ft in enumerate(f_tris):
        ffunc = f_funcs[fi]
        for gi, gt in enumerate(g_tris):
            cell = clip_triangles(ft, gt)
            if not cell:
                continue
            gfunc = g_funcs[gi]
            for k in range(1, len(cell) - 1):
                total += integrate_product_over_triangle(
                    ffunc, gfunc, (cell[0], cell[k], cell[k + 1])
                )
    return total


def _product_monomial_coeffs(F, G):
    """Coefficients of F*G on the quadratic monomial basis MONOMIALS."""
    counting.add("rat", 13)
    return (
        F.a * G.a,
        F.a * G.b + F.b * G.a,
        F.a * G.c + F.c * G.a,
        F.b * G.b,
        F.b * G.c + F.c * G.b,
        F.c * G.c,
    )


def _wedge_values(line1, line2):
    """Monomial wedge integrals for the two lines, higher slope first."""
    (y1, s1), (y2, s2) = line1, line2
    if s1 > s2:
        w = WedgeLines(y1, s1, y2, s2)
    else:
        w = WedgeLines(y2, s2, y1, s1)
    return [wedge_integral_monomial(w, i, j) for i, j in MONOMIALS]


def naive_edge_term_sum(f: Tin, g: Tin, f_edges=None, g_edges=None) -> mpq:
    """Edge-crossing part of the overlay sum, by brute force over pairs.

    Every transversal crossing of interior edges contributes its four
    overlay-cell corners, all integrated over the wedge of the two
    supporting lines; any non-transversal interior contact is a
    degeneracy the caller should have screened out.
    """
    if f_edges is None:
        f_edges = build_edge_data(f)
    if g_edges is None:
        g_edges = build_edge_data(g)
    total = mpq(0)
    f_int = [e for e in f_edges if not e.is_boundary]
    g_int = [e for e in g_edges if not e.is_boundary]
    for ef in f_int:
        p1, p2 = f.xy(ef.u), f.xy(ef.v)
        for eg in g_int:
            q1, q2 = g.xy(eg.u), g.xy(eg.v)
            o1 = _orient(p1, p2, q1)
            o2 = _orient(p1, p2, q2)
            o3 = _orient(q1, q2, p1)
            o4 = _orient(q1, q2, p2)
            if o1 * o2 > 0 or o3 * o4 > 0:
                continue  # strictly separated by one supporting line
            if o1 * o2 < 0 and o3 * o4 < 0:
                total += _crossing_term(ef, eg)
                continue
            # some orientation vanished: endpoint contact or collinearity
            if _segments_touch(p1, p2, q1, q2, o1, o2, o3, o4):
                raise DegenerateInput(
                    f"non-transversal contact between f edge {ef.u}-{ef.v} "
                    f"and g edge {eg.u}-{eg.v}"
                )
    return total


def _segments_touch(p1, p2, q1, q2, o1, o2, o3, o4):
    """True only for degenerate contact: an endpoint strictly inside the
    other segment, or collinear segments overlapping in more than a point.
    A shared endpoint is legal (it is an original vertex, handled by the
    vertex term) and reports False."""

    def on_seg(p, a, b):
        return (
            min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
        )

    if o1 == 0 and o2 == 0:
        # collinear; overlap of more than a single point is degenerate
        if p1[0] != p2[0]:
            lo1, hi1 = sorted((p1[0], p2[0]))
            lo2, hi2 = sorted((q1[0], q2[0]))
        else:
            lo1, hi1 = sorted((p1[1], p2[1]))
            lo2, hi2 = sorted((q1[1], q2[1]))
        return max(lo1, lo2) < min(hi1, hi2)
    for oz, pt, a, b in (
        (o1, q1, p1, p2),
        (o2, q2, p1, p2),
        (o3, p1, q1, q2),
        (o4, p2, q1, q2),
    ):
        if oz == 0 and pt != a and pt != b and on_seg(pt, a, b):
            return True
    return False


def _crossing_term(ef, eg) -> mpq:
    """Four-cell contribution of one transversal crossing."""
    w = _wedge_values((ef.y0, ef.s), (eg.y0, eg.s))
    total = mpq(0)
    for F, G, sign in (
        (ef.upper_func, eg.lower_func, 1),
        (ef.lower_func, eg.upper_func, 1),
        (ef.upper_func, eg.upper_func, -1),
        (ef.lower_func, eg.lower_func, -1),
    ):
        coeffs = _product_monomial_coeffs(F, G)
        total += sign * sum(c * wv for c, wv in zip(coeffs, w))
    return total


def _primitive_dir(dx, dy):
    """Direction as a primitive integer vector, orientation preserved."""
    dx, dy = mpq(dx), mpq(dy)
    den = dx.denominator * dy.denominator
    ix = int(dx * den)
    iy = int(dy * den)
    g = math.gcd(abs(ix), abs(iy))
    return (ix // g, iy // g)


def _angle_cmp(d1, d2):
    """Counterclockwise angular order starting from the positive x axis."""
    counting.add("rat", 3)
    h1 = 0 if (d1[1] > 0 or (d1[1] == 0 and d1[0] > 0)) else 1
    h2 = 0 if (d2[1] > 0 or (d2[1] == 0 and d2[0] > 0)) else 1
    if h1 != h2:
        return -1 if h1 < h2 else 1
    cr = d1[0] * d2[1] - d1[1] * d2[0]
    if cr > 0:
        return -1
    if cr < 0:
        return 1
    return 0


def _vertex_triangle_map(t: Tin):
    out = [[] for _ in range(t.n_vertices)]
    for ti, tri in enumerate(t.triangles):
        for v in tri:
            out[v].append(ti)
    return out


def _cone_triangle(t: Tin, vert_tris, vi, p, d):
    """Incident triangle whose corner cone at vertex vi contains d."""
    for ti in vert_tris[vi]:
        tri = t.triangles[ti]
        k = tri.index(vi)
        q = t.xy(tri[(k + 1) % 3])
        r = t.xy(tri[(k + 2) % 3])
        u = (q[0] - p[0], q[1] - p[1])
        v = (r[0] - p[0], r[1] - p[1])
        if (u[0] * d[1] - u[1] * d[0] > 0) and (d[0] * v[1] - d[1] * v[0] > 0):
            return ti
    raise AssertionError("no incident corner cone contains the direction")


def _adjacency(t: Tin):
    adj = [set() for _ in range(t.n_vertices)]
    for a, b, c in t.triangles:
        adj[a].update((b, c))
        adj[b].update((a, c))
        adj[c].update((a, b))
    return adj


def vertex_term_sum(f: Tin, g: Tin, locs=None, *, f_edges=None, g_edges=None) -> mpq:
    """Vertex-anchored part of the overlay sum.

    For every original vertex (of either triangulation; shared points are
    processed once) the incident rays of both triangulations are merged
    into one angular sequence; each sector inside the domain is one
    overlay-cell corner whose wedge is integrated with the product of the
    two containing-triangle interpolants.  Interior vertices in general
    position have only rays of their own triangulation, which is the
    textbook case; boundary vertices pick up the other triangulation's
    rays through the same point.
    """
    if f_edges is None:
        f_edges = build_edge_data(f)
    if g_edges is None:
        g_edges = build_edge_data(g)
    f_pts = [f.xy(i) for i in range(f.n_vertices)]
    g_pts = [g.xy(i) for i in range(g.n_vertices)]
    if locs is None:
        locs = (batch_locate(g, f_pts, g_edges), batch_locate(f, g_pts, f_edges))
    locs_f_in_g, locs_g_in_f = locs

    f_funcs = triangle_funcs(f)
    g_funcs = triangle_funcs(g)
    f_adj = _adjacency(f)
    g_adj = _adjacency(g)
    f_vt = _vertex_triangle_map(f)
    g_vt = _vertex_triangle_map(g)
    fmap = {f.xy(i): i for i in range(f.n_vertices)}
    gmap = {g.xy(i): i for i in range(g.n_vertices)}

    corners = f.domain_corners()
    sides = [(corners[k], corners[(k + 1) % 4]) for k in range(4)]

    total = mpq(0)

    def process(p, fi, gi, floc, gloc):
        """One merged vertex; fi/gi are vertex indices or None per side."""
        nonlocal total
        rays = set()
        if fi is not None:
            for nb in f_adj[fi]:
                q = f.xy(nb)
                rays.add(_primitive_dir(q[0] - p[0], q[1] - p[1]))
        if gi is not None:
            for nb in g_adj[gi]:
                q = g.xy(nb)
                rays.add(_primitive_dir(q[0] - p[0], q[1] - p[1]))
        rays = sorted(rays, key=cmp_to_key(_angle_cmp))
        n = len(rays)
        through = [
            (a, b) for a, b in sides if _orient(a, b, p) == 0
        ]
        for k in range(n):
            d1 = rays[k]
            d2 = rays[(k + 1) % n]
            cr = d1[0] * d2[1] - d1[1] * d2[0]
            if cr > 0:
                d = (d1[0] + d2[0], d1[1] + d2[1])
            elif cr < 0:
                d = (-(d1[0] + d2[0]), -(d1[1] + d2[1]))
            else:
                d = (-d1[1], d1[0])
            if any(
                (b[0] - a[0]) * d[1] - (b[1] - a[1]) * d[0] <= 0 for a, b in through
            ):
                continue  # sector leaves the domain
            # containing triangles for this sector
            if fi is not None:
                fti = _cone_triangle(f, f_vt, fi, p, d)
            else:
                fti = _resolve_other_side(f, f_edges, floc, p, "f")
            if gi is not None:
                gti = _cone_triangle(g, g_vt, gi, p, d)
            else:
                gti = _resolve_other_side(g, g_edges, gloc, p, "g")
            F = f_funcs[fti]
            G = g_funcs[gti]
            lines = []
            for dd in (d1, d2):
                s = mpq(dd[1], dd[0])
                lines.append((p[1] - s * p[0], s))
            w = _wedge_values(lines[0], lines[1])
            s1, s2 = lines[0][1], lines[1][1]
            above1 = d[1] - s1 * d[0] > 0
            above2 = d[1] - s2 * d[0] > 0
            delta = 1 if above1 != above2 else -1
            coeffs = _product_monomial_coeffs(F, G)
            total += delta * sum(c * wv for c, wv in zip(coeffs, w))

    for fi in range(f.n_vertices):
        p = f_pts[fi]
        gi = gmap.get(p)
        process(p, fi, gi, None, locs_f_in_g[fi])
    for gi in range(g.n_vertices):
        p = g_pts[gi]
        if p in fmap:
            continue  # already processed from the f side
        process(p, None, gi, locs_g_in_f[gi], None)
    return total


def _resolve_other_side(t: Tin, edges, loc, p, name):
    """Triangle of the non-owning triangulation containing the sectors."""
    if loc.kind == TRIANGLE:
        return loc.index
    if loc.kind == EDGE:
        e = edges[loc.index]
        if not e.is_boundary:
            raise DegenerateInput(
                f"vertex at {p} lies inside interior {name} edge {e.u}-{e.v}"
            )
        tri = e.upper_tri if e.upper_tri is not None else e.lower_tri
        return tri
    if loc.kind == VERTEX:
        raise AssertionError("shared vertices must be handled by the owner pass")
    if loc.kind == OUTSIDE:
        raise AssertionError("vertex of a valid pair located outside the domain")
    raise AssertionError(f"unknown location kind {loc.kind}")
