"""User-facing quantities: surface moments, L2 distance, vertical matching.

The squared distance and the optimal vertical scaling/translation are
exact rationals assembled from six moments; the square root is the only
inexact output and is reported as a correctly rounded 17-significant-digit
decimal next to the exact square.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import isqrt, mpq

from .geom import Tin, triangle_funcs
from .integrate import naive_inner_product
from .fastinner import inner_product_fast


def moments(t: Tin):
    """(integral of f, integral of f^2, domain area), all exact.

    Per-triangle midpoint rule; the integrands have degree at most two,
    for which the rule is exact.
    """
    funcs = triangle_funcs(t)
    m1 = mpq(0)
    m2 = mpq(0)
    area = mpq(0)
    for tri, fn in zip(t.triangles, funcs):
        a, b, c = (t.xy(i) for i in tri)
        area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        for p, q in ((a, b), (b, c), (c, a)):
            mx, my = (p[0] + q[0]) / 2, (p[1] + q[1]) / 2
            v = fn(mx, my)
            m1 += area2 / 6 * v
            m2 += area2 / 6 * v * v
        area += area2 / 2
    return m1, m2, area


def sqrt_decimal(q, digits=17) -> str:
    """Correctly rounded decimal square root with ``digits`` significant
    digits (ties round away from zero), formatted d.ddd...e+EE."""
    q = mpq(q)
    if q < 0:
        raise ValueError("negative value has no real square root")
    if q == 0:
        return "0"
    num, den = int(q.numerator), int(q.denominator)
    # exponent search: mantissa m = round(sqrt(q) * 10^(digits-1-e10))
    e10 = (len(str(isqrt(num // den + 1))) - 1) if num >= den else -(
        len(str(isqrt(den // num + 1)))
    )
    while True:
        k = digits - 1 - e10
        if k >= 0:
            t4 = 4 * num * 10 ** (2 * k)
            d4 = den
        else:
            t4 = 4 * num
            d4 = den * 10 ** (-2 * k)
        m = (int(isqrt(t4 // d4)) + 1) // 2
        while (2 * m + 1) ** 2 * d4 <= t4:
            m += 1
        while m > 0 and (2 * m - 1) ** 2 * d4 > t4:
            m -= 1
        if m < 10 ** (digits - 1):
            e10 -= 1
        elif m >= 10**digits:
            e10 += 1
        else:
            break
    s = str(m)
    return f"{s[0]}.{s[1:]}e{e10:+03d}"


def _cross_integral(f, g, method, **kw):
    if method == "naive":
        return naive_inner_product(f, g)
    if method == "fast":
        return inner_product_fast(f, g, **kw)
    raise ValueError(f"unknown method {method!r}")


def l2_distance(f: Tin, g: Tin, method="fast", **kw):
    """(exact squared L2 distance, 17-digit decimal of its square root)."""
    _f1, f2, _a = moments(f)
    _g1, g2, _a2 = moments(g)
    fg = _cross_integral(f, g, method, **kw)
    sq = f2 - 2 * fg + g2
    assert sq >= 0
    return sq, sqrt_decimal(sq)


@dataclass(frozen=True)
class FitResult:
    s: object
    t: object
    residual2: object
    degenerate: bool


def best_fit(f: Tin, g: Tin, method="fast", **kw) -> FitResult:
    """Vertical scaling and translation of g minimizing the L2 distance.

    Solves the 2x2 normal equations of the quadratic in (s, t) exactly.
    When g is essentially constant (area * int g^2 equals (int g)^2) the
    scale is indeterminate; the flat fit s=0, t = mean(f) is returned with
    the degenerate flag set.
    """
    f1, f2, area = moments(f)
    g1, g2, _ = moments(g)
    fg = _cross_integral(f, g, method, **kw)
    det = g2 * area - g1 * g1
    if det == 0:
        s = mpq(0)
        t = f1 / area
        degenerate = True
    else:
        s = (fg * area - f1 * g1) / det
        t = (f1 * g2 - fg * g1) / det
        degenerate = False
    residual2 = (
        f2 - 2 * s * fg - 2 * t * f1 + s * s * g2 + 2 * s * t * g1 + t * t * area
    )
    assert residual2 >= 0
    return FitResult(s, t, residual2, degenerate)
