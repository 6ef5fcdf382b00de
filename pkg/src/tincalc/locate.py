"""Batch point location against a triangulation.

A single left-to-right sweep classifies every query point exactly as
inside a triangle, on an edge, on a vertex, or outside the domain.  The
batch formulation replaces per-query search structures: the status list
only ever holds edges of one triangulation, which never cross, so its
vertical order is stable while edges are co-active.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from .geom import Tin, build_edge_data

TRIANGLE = "triangle"
EDGE = "edge"
VERTEX = "vertex"
OUTSIDE = "outside"


@dataclass(frozen=True)
class Location:
    kind: str
    index: int  # triangle / edge / vertex index, -1 for outside


def batch_locate(t: Tin, pts, edges=None):
    """Classify each query point; the result aligns with the input order.

    ``edges`` may be a precomputed build_edge_data(t) list so callers can
    interpret edge indices; it is built on demand otherwise.
    """
    if edges is None:
        edges = build_edge_data(t)
    vmap = {}
    for idx, (x, y, _z) in enumerate(t.vertices):
        vmap[(x, y)] = idx

    INSERT, QUERY, REMOVE = 0, 1, 2
    events = []
    for ei, e in enumerate(edges):
        ux, _ = t.xy(e.u)
        vx, _ = t.xy(e.v)
        events.append((ux, INSERT, ei))
        events.append((vx, REMOVE, ei))
    for qi, p in enumerate(pts):
        events.append((p[0], QUERY, qi))
    events.sort(key=lambda ev: (ev[0], ev[1]))

    right_x = [t.xy(e.v)[0] for e in edges]

    active = []  # edge indices ordered by y at the sweep line
    out = [None] * len(pts)
    for x, kind, idx in events:
        if kind == INSERT:
            # edges tie in y exactly at a shared vertex; edges ending there
            # keep their historical order and sort before the new ones,
            # which order ascending by slope (their order just right of x)
            bisect.insort(
                active,
                idx,
                key=lambda ei: (
                    edges[ei].y0 + edges[ei].s * x,
                    0 if right_x[ei] == x else 1,
                    edges[ei].s,
                ),
            )
        elif kind == REMOVE:
            active.remove(idx)
        else:
            p = pts[idx]
            px, py = p[0], p[1]
            vi = vmap.get((px, py))
            if vi is not None:
                out[idx] = Location(VERTEX, vi)
                continue
            if not active:
                out[idx] = Location(OUTSIDE, -1)
                continue
            pos = bisect.bisect_left(
                active, py, key=lambda ei: edges[ei].y0 + edges[ei].s * px
            )
            if pos < len(active):
                e = edges[active[pos]]
                if e.y0 + e.s * px == py:
                    out[idx] = Location(EDGE, active[pos])
                    continue
            if pos == 0 or pos == len(active):
                out[idx] = Location(OUTSIDE, -1)
                continue
            below = edges[active[pos - 1]]
            tri = below.upper_tri
            if tri is None:
                out[idx] = Location(OUTSIDE, -1)
            else:
                out[idx] = Location(TRIANGLE, tri)
    return out
