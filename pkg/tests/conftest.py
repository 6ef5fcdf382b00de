"""Shared builders for small hand-made triangulations."""

import random

import pytest
from gmpy2 import mpq

from tincalc.geom import Tin, parse_surface


def tin_from(verts_xy, tris, surface, domain=(0, 0, 1, 1)):
    """Tin over explicit 2D vertices with heights from a surface spec."""
    fn = parse_surface(surface)
    rng = random.Random(20240)
    verts = tuple((mpq(x), mpq(y), fn(mpq(x), mpq(y), rng)) for x, y in verts_xy)
    return Tin(verts, tuple(tris), domain)


UNIT_CORNERS = [(0, 0), (1, 0), (1, 1), (0, 1)]


def square_ne(surface="plane:0,1,0"):
    """Unit square split by the (0,0)-(1,1) diagonal."""
    return tin_from(UNIT_CORNERS, [(0, 1, 2), (0, 2, 3)], surface)


def square_nw(surface="plane:0,0,1"):
    """Unit square split by the (1,0)-(0,1) diagonal."""
    return tin_from(UNIT_CORNERS, [(0, 1, 3), (1, 2, 3)], surface)


def square_fan(surface="plane:0,1,0"):
    """Four triangles fanned around the center vertex."""
    verts = UNIT_CORNERS + [(mpq(1, 2), mpq(1, 2))]
    tris = [(0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)]
    return tin_from(verts, tris, surface)


def square_midfan(surface="plane:0,1,0"):
    """Center connected to the four side midpoints; no center-corner edges."""
    verts = UNIT_CORNERS + [
        (mpq(1, 2), mpq(0)),
        (mpq(1), mpq(1, 2)),
        (mpq(1, 2), mpq(1)),
        (mpq(0), mpq(1, 2)),
        (mpq(1, 2), mpq(1, 2)),
    ]
    tris = [
        (7, 0, 4), (7, 4, 8),
        (4, 1, 5), (4, 5, 8),
        (5, 2, 6), (5, 6, 8),
        (6, 3, 7), (6, 7, 8),
    ]
    return tin_from(verts, tris, surface)


@pytest.fixture
def xy_pair():
    """f interpolating x, g interpolating y, over the two diagonal splits."""
    return square_ne("plane:0,1,0"), square_nw("plane:0,0,1")
