"""Bipartite clique cover of all red/blue segment crossings.

Red segments come from one triangulation and blue from the other, so
same-color segments meet at most in shared endpoints.  A hereditary
segment tree over the endpoint x-coordinates registers every segment as
"long" at the canonical nodes whose slab it spans and as "short" at every
node it merely passes through while being pushed down.  A crossing pair
is caught exactly once: at the deeper of the two canonical nodes
containing the crossing, where one segment is long and the other is long
or short.

Within a node's slab the long segments of one color never cross each
other, hence carry a single vertical order valid across the whole slab.
The partners of a query segment split into two contiguous intervals of
that order (those crossed upward and downward), which a canonical
interval decomposition turns into bicliques with per-clique slope
separation; that separation is exactly the direction of the crossing.

Everything is exact rational arithmetic; ties at slab boundaries resolve
by explicit endpoint logic and any non-transversal red/blue contact
raises DegenerateInput.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from . import counting
from .errors import DegenerateInput


@dataclass(frozen=True)
class Clique:
    red: tuple  # indices into the red segment list
    blue: tuple
    red_higher_slope: bool  # True: every red slope exceeds every blue slope


@dataclass(frozen=True)
class CliqueFamily:
    cliques: tuple

    def total_size(self):
        return sum(len(c.red) + len(c.blue) for c in self.cliques)

    def pair_count(self):
        return sum(len(c.red) * len(c.blue) for c in self.cliques)


class _Seg:
    __slots__ = ("x1", "y1", "x2", "y2", "s", "idx")

    def __init__(self, p, q, idx):
        (x1, y1), (x2, y2) = p, q
        x1, y1, x2, y2 = mpq(x1), mpq(y1), mpq(x2), mpq(y2)
        if x1 > x2 or (x1 == x2):
            if x1 == x2:
                raise DegenerateInput("vertical segment in clique cover input")
            x1, y1, x2, y2 = x2, y2, x1, y1
        self.x1, self.y1, self.x2, self.y2 = x1, y1, x2, y2
        self.s = (y2 - y1) / (x2 - x1)
        self.idx = idx

    def y_at(self, x):
        counting.add("rat", 2)
        return self.y1 + self.s * (x - self.x1)


def _to_segs(segments):
    return [_Seg(p, q, i) for i, (p, q) in enumerate(segments)]


def build_clique_cover(red, blue) -> CliqueFamily:
    """Cover every crossing (red, blue) pair by bicliques, each exactly once.

    ``red`` and ``blue`` are sequences of endpoint pairs ((x1, y1), (x2, y2))
    of non-vertical segments.  Within each color segments may share
    endpoints but never interior points (triangulation edge sets have this
    property, and the contiguous-interval structure below depends on it).
    Red/blue contacts must be transversal crossings interior to both
    segments; detected violations raise DegenerateInput.
    """
    reds = _to_segs(red)
    blues = _to_segs(blue)
    if not reds or not blues:
        return CliqueFamily(())

    xs = sorted({s.x1 for s in reds + blues} | {s.x2 for s in reds + blues})
    if len(xs) < 2:
        return CliqueFamily(())
    n_slabs = len(xs) - 1
    rank = {x: i for i, x in enumerate(xs)}

    node_long = {}  # node -> (red list, blue list)
    node_short = {}

    def insert(seg, color, lo, hi, il, ir):
        # node covers slabs [lo, hi); segment covers [il, ir)
        if il <= lo and hi <= ir:
            node_long.setdefault((lo, hi), ([], []))[color].append(seg)
            return
        node_short.setdefault((lo, hi), ([], []))[color].append(seg)
        mid = (lo + hi) // 2
        if il < mid:
            insert(seg, color, lo, mid, il, ir)
        if ir > mid:
            insert(seg, color, mid, hi, il, ir)

    for color, segs in ((0, reds), (1, blues)):
        for s in segs:
            insert(s, color, 0, n_slabs, rank[s.x1], rank[s.x2])

    out = []
    for (lo, hi), (long_r, long_b) in node_long.items():
        short_r, short_b = node_short.get((lo, hi), ([], []))
        a, b = xs[lo], xs[hi]
        if long_r and (long_b or short_b):
            _emit(out, long_r, list(long_b) + list(short_b), a, b, True)
        if long_b and short_r:
            _emit(out, long_b, list(short_r), a, b, False)
    return CliqueFamily(tuple(out))


def _emit(out, longs, queries, a, b, longs_are_red):
    """Cliques between slab-spanning ``longs`` and query segments.

    Every emitted clique has all its pairs crossing inside [a, b) clipped
    to each query's own span; the orientation flag records which color has
    the uniformly higher slopes.
    """
    arr = sorted(longs, key=lambda s: (s.y_at(a), s.s))
    counting.add("rat", len(longs) * max(1, len(longs).bit_length()))
    ell = len(arr)
    buckets = {}

    def bisect_below(x, target):
        # first index whose y at x is >= target
        lo_i, hi_i = 0, ell
        while lo_i < hi_i:
            mid = (lo_i + hi_i) // 2
            counting.add("rat", 1)
            if arr[mid].y_at(x) < target:
                lo_i = mid + 1
            else:
                hi_i = mid
        return lo_i

    def bisect_range(x, target, lo_i, hi_i, strict_above):
        # within [lo_i, hi_i): first index with y(x) > target (strict_above)
        # or y(x) >= target (not strict_above); the slice is y(x)-sorted
        while lo_i < hi_i:
            mid = (lo_i + hi_i) // 2
            counting.add("rat", 1)
            v = arr[mid].y_at(x)
            if v < target or (strict_above and v == target):
                lo_i = mid + 1
            else:
                hi_i = mid
        return lo_i

    for q in queries:
        wl = a if q.x1 <= a else q.x1
        wr = b if q.x2 >= b else q.x2
        yq_l = q.y_at(wl)
        yq_r = q.y_at(wr)
        split = bisect_below(wl, yq_l)
        # tie group: longs passing through (wl, yq_l)
        tie_end = split
        while tie_end < ell and arr[tie_end].y_at(wl) == yq_l:
            tie_end += 1
        tie_up = tie_down = None
        if tie_end > split:
            if wl == q.x1:
                pass  # contact at the query's own endpoint: no crossing
            elif tie_end - split > 1:
                raise DegenerateInput(
                    "several segments of one color through a point interior "
                    "to a segment of the other color"
                )
            else:
                r0 = arr[split]
                if not (r0.x1 < wl < r0.x2):
                    raise DegenerateInput(
                        "segment endpoint in the interior of an opposite-color segment"
                    )
                if r0.s == q.s:
                    raise DegenerateInput("collinear red/blue contact")
                if r0.s > q.s:
                    tie_up = split
                else:
                    tie_down = split
        # upward crossers: strictly below at wl, strictly above at wr
        up_lo = bisect_range(wr, yq_r, 0, split, strict_above=True)
        up_hi = split + (1 if tie_up is not None else 0)
        # downward crossers: strictly above at wl, strictly below at wr
        dn_lo = split if tie_down is not None else tie_end
        dn_hi = bisect_range(wr, yq_r, tie_end, ell, strict_above=False)
        if up_lo < up_hi:
            _bucket(buckets, 0, ell, up_lo, up_hi, q, True)
        if dn_lo < dn_hi:
            _bucket(buckets, 0, ell, dn_lo, dn_hi, q, False)

    for (lo_i, hi_i, up), qs in buckets.items():
        longs_ids = tuple(s.idx for s in arr[lo_i:hi_i])
        q_ids = tuple(s.idx for s in qs)
        # up=True: longs cross queries upward, so longs have higher slopes
        if longs_are_red:
            out.append(Clique(longs_ids, q_ids, red_higher_slope=up))
        else:
            out.append(Clique(q_ids, longs_ids, red_higher_slope=not up))


def _bucket(buckets, lo, hi, i, j, q, up):
    """Canonical decomposition of [i, j) over the implicit tree on [lo, hi)."""
    if i <= lo and hi <= j:
        buckets.setdefault((lo, hi, up), []).append(q)
        return
    mid = (lo + hi) // 2
    if i < mid:
        _bucket(buckets, lo, mid, i, min(j, mid), q, up)
    if j > mid:
        _bucket(buckets, mid, hi, max(i, mid), j, q, up)


def _cross_transversal(r, b):
    """Exact: do the open segments cross at a point interior to both?"""

    def orient(ax, ay, bx, by, cx, cy):
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)

    o1 = orient(r.x1, r.y1, r.x2, r.y2, b.x1, b.y1)
    o2 = orient(r.x1, r.y1, r.x2, r.y2, b.x2, b.y2)
    o3 = orient(b.x1, b.y1, b.x2, b.y2, r.x1, r.y1)
    o4 = orient(b.x1, b.y1, b.x2, b.y2, r.x2, r.y2)
    return o1 * o2 < 0 and o3 * o4 < 0


@dataclass(frozen=True)
class CoverReport:
    ok: bool
    problems: tuple
    total_size: int
    crossing_pairs: int


def verify_clique_cover(fam: CliqueFamily, red, blue) -> CoverReport:
    """Brute-force audit of the cover contract.

    Checks that all clique pairs cross (i), that slopes separate with the
    recorded orientation (ii), and that the multiset of covered pairs is
    exactly the set of crossing pairs (iii).  The measured total size is
    reported for the subquadratic-growth trend checks.
    """
    reds = _to_segs(red)
    blues = _to_segs(blue)
    problems = []

    crossing = set()
    for r in reds:
        for b in blues:
            if not (r.x2 <= b.x1 or b.x2 <= r.x1) and _cross_transversal(r, b):
                crossing.add((r.idx, b.idx))

    covered = {}
    for ci, c in enumerate(fam.cliques):
        if c.red and c.blue:
            r_slopes = [reds[i].s for i in c.red]
            b_slopes = [blues[i].s for i in c.blue]
            if c.red_higher_slope:
                if not min(r_slopes) > max(b_slopes):
                    problems.append(f"clique {ci}: slope separation violated")
            else:
                if not max(r_slopes) < min(b_slopes):
                    problems.append(f"clique {ci}: slope separation violated")
        for ri in c.red:
            for bi in c.blue:
                covered[(ri, bi)] = covered.get((ri, bi), 0) + 1
                if (ri, bi) not in crossing:
                    problems.append(
                        f"clique {ci}: pair ({ri}, {bi}) does not cross"
                    )
    for pair, cnt in covered.items():
        if cnt > 1:
            problems.append(f"pair {pair} covered {cnt} times")
    missing = crossing - set(covered)
    for pair in sorted(missing)[:20]:
        problems.append(f"crossing pair {pair} not covered")

    return CoverReport(
        ok=not problems,
        problems=tuple(problems[:50]),
        total_size=fam.total_size(),
        crossing_pairs=len(crossing),
    )
