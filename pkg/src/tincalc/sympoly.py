"""Small exact multivariate polynomial engine.

Derives, once, the closed-form antiderivatives Q_{i,j} and the wedge
numerators P_{i,j} used to integrate monomials x^i y^j over the triangle
bounded by the y-axis and two non-parallel lines, and integrates bivariate
polynomials over convex polygons by summing signed corner wedges.

Everything here is exact over the rationals; gmpy2.mpq is the coefficient
type throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from gmpy2 import mpq

from . import counting
from .errors import NotConvex, ParallelLines

_ZERO = mpq(0)
_ONE = mpq(1)


class MPoly:
    """Multivariate polynomial with rational coefficients.

    Immutable; a fixed tuple of variable names is chosen at creation and
    terms map exponent tuples (aligned with ``variables``) to nonzero mpq
    coefficients.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms=None):
        self.variables = tuple(variables)
        clean = {}
        if terms:
            for exps, c in terms.items():
                c = mpq(c)
                if c != 0:
                    exps = tuple(int(e) for e in exps)
                    if len(exps) != len(self.variables):
                        raise ValueError("exponent tuple does not match variable set")
                    clean[exps] = clean.get(exps, _ZERO) + c
        self.terms = {e: c for e, c in clean.items() if c != 0}

    @classmethod
    def constant(cls, variables, value):
        value = mpq(value)
        if value == 0:
            return cls(variables)
        return cls(variables, {(0,) * len(tuple(variables)): value})

    @classmethod
    def var(cls, variables, name):
        variables = tuple(variables)
        exps = [0] * len(variables)
        exps[variables.index(name)] = 1
        return cls(variables, {tuple(exps): _ONE})

    def _check(self, other):
        if self.variables != other.variables:
            raise ValueError("mixed variable sets")

    def __eq__(self, other):
        return (
            isinstance(other, MPoly)
            and self.variables == other.variables
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        if isinstance(other, (int, type(_ONE))):
            other = MPoly.constant(self.variables, other)
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, _ZERO) + c
        return MPoly(self.variables, terms)

    def __neg__(self):
        return MPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, type(_ONE))):
            other = MPoly.constant(self.variables, other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, type(_ONE))):
            c = mpq(other)
            return MPoly(self.variables, {e: c * v for e, v in self.terms.items()})
        self._check(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, _ZERO) + c1 * c2
        return MPoly(self.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        result = MPoly.constant(self.variables, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def total_degree(self):
        """Total degree, or -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, name):
        if not self.terms:
            return -1
        i = self.variables.index(name)
        return max(e[i] for e in self.terms)

    def diff(self, name):
        i = self.variables.index(name)
        terms = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            ne = list(e)
            ne[i] -= 1
            terms[tuple(ne)] = c * e[i]
        return MPoly(self.variables, terms)

    def integrate(self, name):
        """Antiderivative in ``name`` with zero constant term."""
        i = self.variables.index(name)
        terms = {}
        for e, c in self.terms.items():
            ne = list(e)
            ne[i] += 1
            terms[tuple(ne)] = c / ne[i]
        return MPoly(self.variables, terms)

    def coeff_of(self, name, power):
        """Coefficient of name**power, an MPoly in the same variable set."""
        i = self.variables.index(name)
        terms = {}
        for e, c in self.terms.items():
            if e[i] == power:
                ne = list(e)
                ne[i] = 0
                terms[tuple(ne)] = c
        return MPoly(self.variables, terms)

    def as_univariate(self, name):
        """Map power -> coefficient MPoly (exponent of ``name`` zeroed out)."""
        i = self.variables.index(name)
        out = {}
        for e, c in self.terms.items():
            ne = list(e)
            k = ne[i]
            ne[i] = 0
            coeff = out.setdefault(k, {})
            coeff[tuple(ne)] = coeff.get(tuple(ne), _ZERO) + c
        return {k: MPoly(self.variables, t) for k, t in out.items()}

    def compose(self, new_variables, mapping):
        """Substitute every variable with an MPoly over ``new_variables``."""
        new_variables = tuple(new_variables)
        result = MPoly(new_variables)
        for e, c in self.terms.items():
            term = MPoly.constant(new_variables, c)
            for name, power in zip(self.variables, e):
                if power:
                    term = term * (mapping[name] ** power)
            result = result + term
        return result

    def evaluate(self, values):
        """Evaluate at a dict of variable name -> mpq."""
        vals = [mpq(values[v]) for v in self.variables]
        total = _ZERO
        for e, c in self.terms.items():
            t = c
            for v, p in zip(vals, e):
                if p:
                    t = t * v**p
            total += t
        return total

    def divide_exact_linear(self, name, root):
        """Exact division by (name - root); raises if the remainder is nonzero.

        ``root`` is an MPoly over the same variable set not involving ``name``.
        """
        uni = self.as_univariate(name)
        if not uni:
            return MPoly(self.variables)
        m = max(uni)
        zero = MPoly(self.variables)
        a = [uni.get(k, zero) for k in range(m + 1)]
        v = MPoly.var(self.variables, name)
        b = a[m]
        quotient = zero
        for k in range(m - 1, -1, -1):
            quotient = quotient + b * v**k
            b = a[k] + root * b
        if b:
            raise ArithmeticError("nonzero remainder in exact linear division")
        return quotient

    def __repr__(self):
        if not self.terms:
            return "MPoly(0)"
        bits = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                f"{v}^{p}" if p > 1 else v
                for v, p in zip(self.variables, e)
                if p
            )
            bits.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "MPoly(" + " + ".join(bits) + ")"


@dataclass(frozen=True)
class WedgeLines:
    """The two non-parallel lines y = y_l + s_l*x and y = y_u + s_u*x.

    For geometric wedges the caller puts the higher-slope line in the
    ``l`` slot; the algebra below is antisymmetric under swapping.
    """

    y_l: object
    s_l: object
    y_u: object
    s_u: object

    def __post_init__(self):
        if mpq(self.s_l) == mpq(self.s_u):
            raise ParallelLines("wedge lines must have distinct slopes")


Q_VARS = ("u", "v", "x")
P_VARS = ("y_l", "y_u", "s_l", "s_u")


@lru_cache(maxsize=None)
def antiderivative_Q(i, j):
    """The polynomial Q with dQ/dx = x^i (u + v x)^j and Q(u, v, 0) = 0."""
    if i < 0 or j < 0:
        raise ValueError("exponents must be nonnegative")
    u = MPoly.var(Q_VARS, "u")
    v = MPoly.var(Q_VARS, "v")
    x = MPoly.var(Q_VARS, "x")
    integrand = x**i * (u + v * x) ** j
    return integrand.integrate("x")


@lru_cache(maxsize=None)
def wedge_numerator_P(i, j):
    """Numerator polynomial of the wedge monomial integral.

    Satisfies  integral over the wedge of x^i y^j  =  P / (s_u - s_l)^(i+j+1).
    Built from Q_{i,j+1} evaluated on both lines, with the intersection
    abscissa substituted and one factor of (s_u - s_l) divided out exactly;
    a nonzero remainder in that division would falsify the derivation and
    raises ArithmeticError.
    """
    if i < 0 or j < 0:
        raise ValueError("exponents must be nonnegative")
    q = antiderivative_Q(i, j + 1)
    vars5 = P_VARS + ("x",)
    x = MPoly.var(vars5, "x")
    sub_u = {"u": MPoly.var(vars5, "y_u"), "v": MPoly.var(vars5, "s_u"), "x": x}
    sub_l = {"u": MPoly.var(vars5, "y_l"), "v": MPoly.var(vars5, "s_l"), "x": x}
    g = (q.compose(vars5, sub_u) - q.compose(vars5, sub_l)) * mpq(1, j + 1)

    y_l = MPoly.var(P_VARS, "y_l")
    y_u = MPoly.var(P_VARS, "y_u")
    s_l = MPoly.var(P_VARS, "s_l")
    s_u = MPoly.var(P_VARS, "s_u")
    num = -(y_u - y_l)  # x_p = num / (s_u - s_l)
    den_pow = i + j + 2

    uni = g.as_univariate("x")
    strip = {"y_l": y_l, "y_u": y_u, "s_l": s_l, "s_u": s_u, "x": MPoly(P_VARS)}
    h = MPoly(P_VARS)
    sml = s_u - s_l
    for k, coeff in uni.items():
        h = h + coeff.compose(P_VARS, strip) * (num**k) * (sml ** (den_pow - k))
    return h.divide_exact_linear("s_u", s_l)


def wedge_integral_monomial(w: WedgeLines, i, j):
    """Exact integral of x^i y^j over the wedge of the two lines.

    The wedge is the triangle cut off between the lines from x = 0 to their
    intersection; with s_l > s_u and the intersection right of the y-axis it
    is traversed positively, and swapping the lines flips the sign.
    """
    s_l, s_u = mpq(w.s_l), mpq(w.s_u)
    if s_l == s_u:
        raise ParallelLines("parallel lines bound no wedge")
    p = wedge_numerator_P(i, j)
    counting.add("rat", 5 * len(p.terms) + 4)
    val = p.evaluate({"y_l": w.y_l, "y_u": w.y_u, "s_l": s_l, "s_u": s_u})
    return val / (s_u - s_l) ** (i + j + 1)


def _shear_away_verticals(verts, h):
    """Apply (x, y) -> (x + lam*y + tau, y) so no edge is vertical, x >= 0.

    The map has unit determinant, so integrating the pulled-back integrand
    over the image gives the original integral.
    """
    n = len(verts)
    deltas = [
        (verts[(k + 1) % n][0] - verts[k][0], verts[(k + 1) % n][1] - verts[k][1])
        for k in range(n)
    ]
    lam = None
    k = 1
    while lam is None:
        for cand in (mpq(1, k), mpq(-1, k)):
            if all(dx + cand * dy != 0 for dx, dy in deltas):
                lam = cand
                break
        k += 1
    sheared = [(x + lam * y, y) for x, y in verts]
    tau = min(x for x, _ in sheared)
    tau = -tau if tau < 0 else mpq(0)
    sheared = [(x + tau, y) for x, y in sheared]
    x_new = MPoly.var(h.variables, "x")
    y_new = MPoly.var(h.variables, "y")
    mapping = {"x": x_new - lam * y_new - tau, "y": y_new}
    return sheared, h.compose(h.variables, mapping)


def _line_through(p, q):
    """(intercept, slope) of the non-vertical line through p and q."""
    dx = q[0] - p[0]
    if dx == 0:
        raise ParallelLines("vertical edge line; shear the input first")
    s = (q[1] - p[1]) / dx
    return p[1] - s * p[0], s


def integrate_over_convex_polygon(verts, h: MPoly):
    """Exact integral of a bivariate polynomial over a convex polygon.

    ``verts`` is a CCW sequence of (x, y) pairs forming a strictly convex
    polygon with all x >= 0; ``h`` is an MPoly in ("x", "y").  Computed as
    the signed sum of corner wedges.  Vertical edges are removed internally
    by a unit shear applied to both the polygon and the integrand, which
    leaves the integral unchanged.
    """
    n = len(verts)
    if n < 3:
        raise NotConvex("need at least three vertices")
    verts = [(mpq(x), mpq(y)) for x, y in verts]
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        cx, cy = verts[(k + 2) % n]
        if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) <= 0:
            raise NotConvex("vertices are not strictly convex CCW")
        if ax < 0:
            raise ValueError("all vertices must satisfy x >= 0")

    if any(verts[k][0] == verts[(k + 1) % n][0] for k in range(n)):
        verts, h = _shear_away_verticals(verts, h)

    monos = [(e[h.variables.index("x")], e[h.variables.index("y")], c)
             for e, c in h.terms.items()]
    total = _ZERO
    for k in range(n):
        p_prev = verts[(k - 1) % n]
        p = verts[k]
        p_next = verts[(k + 1) % n]
        y1, s1 = _line_through(p_prev, p)
        y2, s2 = _line_through(p, p_next)
        if s1 == s2:
            raise ParallelLines("collinear consecutive edges")
        if s1 > s2:
            lines = WedgeLines(y1, s1, y2, s2)
        else:
            lines = WedgeLines(y2, s2, y1, s1)
        # interior direction of the corner cone; strictly convex so the
        # angle is below pi and the sum of the two edge directions works
        dx = (p_prev[0] - p[0]) + (p_next[0] - p[0])
        dy = (p_prev[1] - p[1]) + (p_next[1] - p[1])
        above_l = dy - mpq(lines.s_l) * dx > 0
        above_u = dy - mpq(lines.s_u) * dx > 0
        delta = 1 if above_l != above_u else -1
        for i, j, c in monos:
            total += delta * c * wedge_integral_monomial(lines, i, j)
    return total
