"""The subquadratic inner-product pipeline.

Overall shape: normalize the pair, compute the vertex-anchored sum in
exact rationals, cover all interior edge crossings with bicliques, then
evaluate each clique's double sum modulo a basket of word-size primes and
recover the exact rational edge sum by CRT plus rational reconstruction,
verified against a held-out prime and doubling the basket on failure.

Per clique and prime, the crossing contribution

    sum over red e1, blue e2 of
        v(e1) w(e2) P_ij(y_L, y_U, s_L, s_U) / (s_U - s_L)^(i+j+1)

is brought over the common denominator (X - s(e2))^3, with X standing for
the red slope and Y for the red intercept.  The symbolic expansion happens
once per orientation: the integrand's nine separable weight instances are
grouped into three lanes by their red weight component, so one divide and
conquer over the blue edges carries 3 lanes x 7 Y-powers numerator
polynomials over a shared denominator tree.  Numerators are then
evaluated at all red slopes by a batched subproduct/remainder tree and
combined with red weights and intercept powers.

Small cliques skip the machinery: the same compiled expansion is
evaluated pairwise, vectorized across every crossing pair of all small
cliques at once.  The cutoff is a constant, so the cost per clique stays
O((|R|+|B|) polylog) either way.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from gmpy2 import mpq

from . import counting
from .cliques import CliqueFamily, build_clique_cover
from .errors import BadPrime, DegenerateInput, InsufficientPrimes
from .fastpoly import PrimeField
from .field import PrimeBasket, crt_reconstruct, ntt_friendly_primes, rat_to_fp
from .geom import Tin, build_edge_data, normalize_pair, validate_pair
from .integrate import vertex_term_sum
from .sympoly import MPoly, wedge_numerator_P

Y_POWERS = 7  # integrand degree in the red intercept is at most 6
X_POWERS = 7
DIRECT_PAIR_CUTOFF = 2048
DIRECT_MIN_SIDE = 4

TEMPLATE_VARS = ("X", "Y", "y2", "s2")

# weight-triple selection per mode: (sign, red function key, blue function key)
MODE_GROUPS = {
    "difference": ((-1, "phi", "phi"),),
    "expanded": ((1, "u", "l"), (1, "l", "u"), (-1, "u", "u"), (-1, "l", "l")),
}


@lru_cache(maxsize=None)
def _lane_templates(red_is_line_l: bool):
    """Compiled expansion entries for one clique orientation.

    red_is_line_l: the red edge has the higher slope and supplies the
    wedge line L.  Entries are (lane, w_idx, dX, dY, e_y2, e_s2, coeff)
    with the per-pair integrand equal to

      sum of v_lane(e1) w_widx(e2) coeff X^dX Y^dY y2^e_y2 s2^e_s2
      over entries, all divided by (X - s2)^3.
    """
    X = MPoly.var(TEMPLATE_VARS, "X")
    Y = MPoly.var(TEMPLATE_VARS, "Y")
    y2 = MPoly.var(TEMPLATE_VARS, "y2")
    s2 = MPoly.var(TEMPLATE_VARS, "s2")
    merged = {}
    for (i, j), places in (
        ((0, 0), ((0, 0),)),
        ((1, 0), ((0, 1), (1, 0))),
        ((0, 1), ((0, 2), (2, 0))),
        ((2, 0), ((1, 1),)),
        ((1, 1), ((1, 2), (2, 1))),
        ((0, 2), ((2, 2),)),
    ):
        d = i + j + 1
        p = wedge_numerator_P(i, j)
        if red_is_line_l:
            mapping = {"y_l": Y, "y_u": y2, "s_l": X, "s_u": s2}
            sign = (-1) ** d
        else:
            mapping = {"y_l": y2, "y_u": Y, "s_l": s2, "s_u": X}
            sign = 1
        g = p.compose(TEMPLATE_VARS, mapping) * sign * (X - s2) ** (3 - d)
        for lane, w_idx in places:
            for exps, coeff in g.terms.items():
                key = (lane, w_idx) + exps
                merged[key] = merged.get(key, mpq(0)) + coeff
    return tuple(k + (c,) for k, c in sorted(merged.items()) if c != 0)


@dataclass
class _Tpl:
    lane: np.ndarray
    w_idx: np.ndarray
    dX: np.ndarray
    dY: np.ndarray
    ey2: np.ndarray
    es2: np.ndarray
    num: tuple  # coefficient numerators, python ints
    den: tuple  # positive denominators
    flat_out: np.ndarray  # lane * Y_POWERS + dY for scatter adds


@lru_cache(maxsize=None)
def _compiled(red_is_line_l: bool) -> _Tpl:
    entries = _lane_templates(red_is_line_l)
    cols = list(zip(*entries))
    lane, w_idx, dX, dY, ey2, es2, coeff = cols
    lane = np.array(lane, dtype=np.int64)
    dY = np.array(dY, dtype=np.int64)
    assert all(
        abs(int(c.numerator)) < 2**62 and int(c.denominator) < 2**62 for c in coeff
    )
    return _Tpl(
        lane,
        np.array(w_idx, dtype=np.int64),
        np.array(dX, dtype=np.int64),
        dY,
        np.array(ey2, dtype=np.int64),
        np.array(es2, dtype=np.int64),
        np.array([int(c.numerator) for c in coeff], dtype=np.int64),
        np.array([int(c.denominator) for c in coeff], dtype=np.int64),
        lane * Y_POWERS + dY,
    )


def _coeff_residues(tpl: _Tpl, p: int) -> np.ndarray:
    den = (tpl.den % p).astype(np.uint64)
    if np.any(den == 0):
        raise BadPrime(p, "template coefficient denominator")
    num = (tpl.num % p).astype(np.uint64)
    return num * _pow_mod_arr(den, p - 2, p) % p


# ---------------------------------------------------------------------------
# exact edge tables and their per-prime reduction


class _LimbVec:
    """Signed big integers as 32-bit limb arrays for vectorized reduction."""

    __slots__ = ("limbs", "sign")

    def __init__(self, values):
        vals = [int(v) for v in values]
        self.sign = np.array([-1 if v < 0 else 1 for v in vals], dtype=np.int64)
        mags = [abs(v) for v in vals]
        width = max(1, max((m.bit_length() for m in mags), default=1))
        arr = np.zeros(((width + 31) // 32, len(vals)), dtype=np.uint64)
        for i, m in enumerate(mags):
            k = 0
            while m:
                arr[k, i] = m & 0xFFFFFFFF
                m >>= 32
                k += 1
        self.limbs = arr

    def mod(self, p: int) -> np.ndarray:
        base = np.uint64((1 << 32) % p)
        acc = np.zeros(self.limbs.shape[1], dtype=np.uint64)
        for k in range(self.limbs.shape[0] - 1, -1, -1):
            acc = (acc * base + self.limbs[k] % p) % p
        counting.add("fp", 2 * self.limbs.size)
        return np.where(self.sign < 0, (p - acc) % p, acc).astype(np.uint64)


def _pow_mod_arr(a: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def _inv_mod_arr(a: np.ndarray, p: int) -> np.ndarray:
    if np.any(a == 0):
        raise BadPrime(p, "vanishing denominator")
    counting.add("fp", 62 * a.size)
    return _pow_mod_arr(a, p - 2, p)


class _SideTable:
    """Exact per-edge values of one color, packed for per-prime reduction.

    All eleven columns (slope, intercept, three weight components for the
    upper/lower interpolants and their difference) are concatenated into a
    single limb matrix so one fold and one batched inversion per prime
    covers everything.
    """

    KEYS = ("u", "l", "phi")
    ORDER = ("s", "y") + tuple(f"{k}{c}" for k in KEYS for c in range(3))

    def __init__(self, tin: Tin, interior_edges):
        cols = {"s": [e.s for e in interior_edges], "y": [e.y0 for e in interior_edges]}
        for e in interior_edges:
            fu, fl = e.upper_func, e.lower_func
            for comp, (uu, ll) in enumerate(
                ((fu.a, fl.a), (fu.b, fl.b), (fu.c, fl.c))
            ):
                cols.setdefault(f"u{comp}", []).append(uu)
                cols.setdefault(f"l{comp}", []).append(ll)
                cols.setdefault(f"phi{comp}", []).append(uu - ll)
        self.count = len(interior_edges)
        nums, dens = [], []
        for name in self.ORDER:
            nums.extend(mpq(v).numerator for v in cols[name])
            dens.extend(mpq(v).denominator for v in cols[name])
        self._num = _LimbVec(nums)
        self._den = _LimbVec(dens)

    def reduce(self, p: int):
        flat = self._num.mod(p) * _inv_mod_arr(self._den.mod(p), p) % p
        rows = flat.reshape(len(self.ORDER), self.count)
        col = {name: rows[i] for i, name in enumerate(self.ORDER)}
        weights = {
            k: np.ascontiguousarray(rows[2 + 3 * ki : 5 + 3 * ki])
            for ki, k in enumerate(self.KEYS)
        }
        return col["s"], col["y"], weights


# ---------------------------------------------------------------------------
# batched polynomial kernels (numpy arrays over one prime)


def _batch_mul(field, A, B):
    """Row-broadcast polynomial products along the last axis.

    A's leading shape must broadcast with B's; NTT when lengths allow,
    otherwise a vectorized schoolbook loop over the shorter factor.
    """
    p = field.p
    la, lb = A.shape[-1], B.shape[-1]
    n = la + lb - 1
    L = 1 << (n - 1).bit_length()
    if min(la, lb) <= 8 or L > field.max_ntt:
        batch = max(A.size // la, B.size // lb)
        counting.add("fp", 2 * la * lb * batch)
        shape = np.broadcast_shapes(A.shape[:-1], B.shape[:-1])
        out = np.zeros(shape + (n,), dtype=np.uint64)
        if lb <= la:
            for k in range(lb):
                out[..., k : k + la] += A * B[..., k : k + 1] % p
                out[..., k : k + la] %= p
        else:
            for k in range(la):
                out[..., k : k + lb] += B * A[..., k : k + 1] % p
                out[..., k : k + lb] %= p
        return out
    fa = np.zeros(A.shape[:-1] + (L,), dtype=np.uint64)
    fb = np.zeros(B.shape[:-1] + (L,), dtype=np.uint64)
    fa[..., :la] = A
    fb[..., :lb] = B
    fa = field.ntt(fa)
    fb = field.ntt(fb)
    fa = fa * fb % p
    counting.add("fp", max(fa.size, fb.size))
    return field.ntt(fa, invert=True)[..., :n]


def _batch_inv_series(field, frev, n):
    """Inverse power series of each (monic-reversed) row, to length n."""
    p = field.p
    m = frev.shape[0]
    g = np.ones((m, 1), dtype=np.uint64)
    k = 1
    while k < n:
        k <<= 1
        fg = _batch_mul(field, frev[:, : min(k, frev.shape[1])], g)[:, :k]
        e = (np.uint64(p) - fg) % p
        e[:, 0] = (e[:, 0] + np.uint64(2)) % p
        g = _batch_mul(field, g, e)[:, :k]
        counting.add("fp", fg.size)
    return g[:, :n]


def _poly_mod_rows(field, A, b):
    """Reduce every row of A (2D) modulo the single polynomial b (1D)."""
    p = field.p
    b = np.asarray(b, dtype=np.uint64)
    nb = len(b)
    while nb > 1 and b[nb - 1] == 0:
        nb -= 1
    b = b[:nb]
    da = A.shape[-1]
    if da < nb:
        return A.copy()
    n = da - nb + 1
    inv = field.inv_series(b[::-1].tolist(), n)
    inv_arr = np.zeros(min(n, len(inv)), dtype=np.uint64)
    inv_arr[: len(inv)] = inv[: len(inv_arr)]
    Arev = A[..., ::-1][..., :n]
    q_rev = _batch_mul(field, Arev, inv_arr[None, :])[..., :n]
    q = q_rev[..., ::-1]
    qb = _batch_mul(field, q, b[None, :])
    out = (A[..., : nb - 1] + np.uint64(p) - qb[..., : nb - 1]) % p
    counting.add("fp", out.size)
    return out


def _point_tree(field, pts):
    """Subproduct levels over the points (padded to a power of two with
    dummy zeros) plus per-level Newton inverses for the batched descent."""
    r = len(pts)
    size = 1 << max(1, (r - 1).bit_length()) if r > 1 else 1
    padded = np.zeros(size, dtype=np.uint64)
    padded[:r] = pts
    p = field.p
    level = np.empty((size, 2), dtype=np.uint64)
    level[:, 0] = (np.uint64(p) - padded) % p
    level[:, 1] = 1
    levels = [level]
    while level.shape[0] > 1:
        level = _batch_mul(field, level[0::2], level[1::2])
        levels.append(level)
    invs = [
        _batch_inv_series(field, lv[:, ::-1], lv.shape[1] - 1)
        for lv in levels[:-1]
    ]
    return levels, invs


def _remainder_tree(field, polys, levels, invs):
    """Evaluate each row of ``polys`` at every tree point simultaneously."""
    p = field.p
    rems = _poly_mod_rows(field, polys, levels[-1][0])
    rems = rems[:, None, :]
    for level, inv in zip(reversed(levels[:-1]), reversed(invs)):
        m, w = level.shape
        par = rems[:, np.arange(m) // 2, :]
        lp = par.shape[-1]
        if lp < w:
            rems = par
            continue
        nq = lp - (w - 1)
        par_rev = par[..., ::-1][..., :nq]
        q = _batch_mul(field, par_rev, inv[:, :nq])[..., :nq][..., ::-1]
        qb = _batch_mul(field, q, level)
        rems = (par[..., : w - 1] + np.uint64(p) - qb[..., : w - 1]) % p
        counting.add("fp", rems.size)
    return rems[..., 0]


def _power_table(x: np.ndarray, n: int, p: int) -> np.ndarray:
    out = np.ones((n,) + x.shape, dtype=np.uint64)
    for k in range(1, n):
        out[k] = out[k - 1] * x % p
    counting.add("fp", (n - 1) * x.size)
    return out


def _direct_pairs(field, tpl, coeffs, s1, y1, V, s2, y2, W):
    """Pairwise evaluation of the compiled expansion; arrays are per pair."""
    p = field.p
    diff = (s1 + np.uint64(p) - s2) % p
    inv3 = _pow_mod_arr(_inv_mod_arr(diff, p), 3, p)
    xpow = _power_table(s1, X_POWERS, p)
    ypow = _power_table(y1, Y_POWERS, p)
    y2pow = _power_table(y2, Y_POWERS + 2, p)
    s2pow = _power_table(s2, Y_POWERS + 2, p)
    contrib = coeffs[:, None] * xpow[tpl.dX] % p
    contrib = contrib * ypow[tpl.dY] % p
    contrib = contrib * y2pow[tpl.ey2] % p
    contrib = contrib * s2pow[tpl.es2] % p
    contrib = contrib * W[tpl.w_idx] % p
    contrib = contrib * V[tpl.lane] % p
    counting.add("fp", 12 * contrib.size)
    total = contrib.sum(axis=0) % p
    return int((total * inv3 % p).sum() % p)


def _leaf_numerators(field, tpl, coeffs, s2, y2, W):
    """(21, b, X_POWERS) leaf numerator block for the fraction tree."""
    p = field.p
    b = len(s2)
    y2pow = _power_table(y2, Y_POWERS + 2, p)
    s2pow = _power_table(s2, Y_POWERS + 2, p)
    contrib = coeffs[:, None] * y2pow[tpl.ey2] % p
    contrib = contrib * s2pow[tpl.es2] % p
    contrib = contrib * W[tpl.w_idx] % p
    counting.add("fp", 6 * contrib.size)
    leaves = np.zeros((3 * Y_POWERS, X_POWERS, b), dtype=np.uint64)
    np.add.at(leaves, (tpl.flat_out, tpl.dX), contrib)
    leaves %= p
    return leaves.transpose(0, 2, 1)


def _den_leaves(s2, p):
    """(b, 4) cubes (X - s)^3 per blue edge."""
    s = s2 % p
    sq = s * s % p
    cu = sq * s % p
    out = np.empty((len(s), 4), dtype=np.uint64)
    out[:, 0] = (p - cu) % p
    out[:, 1] = 3 * sq % p
    out[:, 2] = (p - 3 * s % p) % p
    out[:, 3] = 1
    counting.add("fp", 4 * len(s))
    return out


def _fraction_tree(field, leavesN, leavesD):
    """Shared-denominator divide and conquer over the blue edges.

    leavesN: (21, b, X_POWERS), leavesD: (b, 4), b a power of two.
    Returns (N (21, len), D (len',)).
    """
    p = field.p
    N, D = leavesN, leavesD
    while N.shape[1] > 1:
        Nl, Nr = N[:, 0::2], N[:, 1::2]
        Dl, Dr = D[0::2], D[1::2]
        a = _batch_mul(field, Nl, Dr[None, :, :])
        bb = _batch_mul(field, Nr, Dl[None, :, :])
        N = (a + bb) % p
        counting.add("fp", a.size)
        D = _batch_mul(field, Dl, Dr)
    return N[:, 0], D[0]


def _clique_sigma_arrays(field, tpl, coeffs, s1, y1, V, s2, y2, W):
    """One clique through the full pipeline; returns a residue."""
    p = field.p
    b = len(s2)
    size = 1 << max(1, (b - 1).bit_length()) if b > 1 else 1
    if size != b:
        pad = size - b
        s2 = np.concatenate([s2, np.zeros(pad, dtype=np.uint64)])
        y2 = np.concatenate([y2, np.zeros(pad, dtype=np.uint64)])
        W = np.concatenate([W, np.zeros((3, pad), dtype=np.uint64)], axis=1)
    leavesN = _leaf_numerators(field, tpl, coeffs, s2, y2, W)
    leavesD = _den_leaves(s2, p)
    N, D = _fraction_tree(field, leavesN, leavesD)

    levels, invs = _point_tree(field, s1)
    width = max(N.shape[-1], len(D))
    rows = np.zeros((22, width), dtype=np.uint64)
    rows[:21, : N.shape[-1]] = N
    rows[21, : len(D)] = D
    vals = _remainder_tree(field, rows, levels, invs)[:, : len(s1)]
    lane_vals = vals[:21].reshape(3, Y_POWERS, len(s1))
    d_vals = vals[21]
    ypow = _power_table(y1, Y_POWERS, p)
    per_lane = (lane_vals * ypow[None, :, :] % p).sum(axis=1) % p
    numer = (per_lane * V % p).sum(axis=0) % p
    counting.add("fp", 4 * per_lane.size)
    total = numer * _inv_mod_arr(d_vals, p) % p
    return int(total.sum() % p)


def clique_sigma(red_items, blue_items, red_higher_slope, p, mode="difference",
                 force=None):
    """Edge-sum contribution of a single clique modulo p.

    ``red_items``/``blue_items`` are (slope, intercept, triples) tuples per
    edge, the triples mapping "u"/"l"/"phi" to (a, b, c) exact-rational
    weights of the upper/lower interpolants and their difference.  The
    orientation flag says every red slope exceeds every blue slope.
    """
    if not red_items or not blue_items:
        return 0
    field = PrimeField(p)
    tpl = _compiled(red_higher_slope)
    coeffs = _coeff_residues(tpl, p)

    def reduce_side(items):
        s = np.array([rat_to_fp(it[0], p) for it in items], dtype=np.uint64)
        y = np.array([rat_to_fp(it[1], p) for it in items], dtype=np.uint64)
        tri = {
            k: np.array(
                [[rat_to_fp(it[2][k][c], p) for it in items] for c in range(3)],
                dtype=np.uint64,
            )
            for k in ("u", "l", "phi")
        }
        return s, y, tri

    s1, y1, tri1 = reduce_side(red_items)
    s2, y2, tri2 = reduce_side(blue_items)
    r, b = len(red_items), len(blue_items)
    use_direct = force == "direct" or (
        force is None
        and (r * b <= DIRECT_PAIR_CUTOFF or min(r, b) <= DIRECT_MIN_SIDE)
    )
    total = 0
    for sign, vkey, wkey in MODE_GROUPS[mode]:
        if use_direct:
            ri = np.repeat(np.arange(r), b)
            bi = np.tile(np.arange(b), r)
            val = _direct_pairs(
                field, tpl, coeffs,
                s1[ri], y1[ri], tri1[vkey][:, ri],
                s2[bi], y2[bi], tri2[wkey][:, bi],
            )
        else:
            val = _clique_sigma_arrays(
                field, tpl, coeffs, s1, y1, tri1[vkey], s2, y2, tri2[wkey]
            )
        total = (total + sign * val) % p
    return total % p


# ---------------------------------------------------------------------------
# whole edge sum per prime, and the reconstruction loop


class _EdgeSumProblem:
    """Everything needed to evaluate the edge sum modulo one prime."""

    def __init__(self, red_table, blue_table, fam: CliqueFamily, mode):
        self.red_table = red_table
        self.blue_table = blue_table
        self.mode = mode
        self.small = {True: ([], []), False: ([], [])}  # orientation -> pair ids
        self.large = []
        for c in fam.cliques:
            ri = np.array(c.red, dtype=np.int64)
            bi = np.array(c.blue, dtype=np.int64)
            r, b = len(ri), len(bi)
            if r * b <= DIRECT_PAIR_CUTOFF or min(r, b) <= DIRECT_MIN_SIDE:
                self.small[c.red_higher_slope][0].append(np.repeat(ri, b))
                self.small[c.red_higher_slope][1].append(np.tile(bi, r))
            else:
                self.large.append((ri, bi, c.red_higher_slope))
        self.small = {
            o: (
                (np.concatenate(pr), np.concatenate(pb)) if pr else None
            )
            for o, (pr, pb) in self.small.items()
        }
        self.max_blue = max((len(b) for _r, b, _o in self.large), default=1)
        self.max_red = max((len(r) for r, _b, _o in self.large), default=1)

    def needed_two_adicity(self):
        longest = max(12 * self.max_blue + 16, 4 * self.max_red + 8, 64)
        return (longest - 1).bit_length()

    def sigma_mod(self, p: int) -> int:
        field = PrimeField(p)
        s1, y1, w1 = self.red_table.reduce(p)
        s2, y2, w2 = self.blue_table.reduce(p)
        total = 0
        for orient in (True, False):
            tpl = _compiled(orient)
            coeffs = _coeff_residues(tpl, p)
            pairs = self.small[orient]
            for sign, vkey, wkey in MODE_GROUPS[self.mode]:
                if pairs is not None:
                    ri, bi = pairs
                    val = _direct_pairs(
                        field, tpl, coeffs,
                        s1[ri], y1[ri], w1[vkey][:, ri],
                        s2[bi], y2[bi], w2[wkey][:, bi],
                    )
                    total = (total + sign * val) % p
                for ri, bi, o in self.large:
                    if o != orient:
                        continue
                    val = _clique_sigma_arrays(
                        field, tpl, coeffs,
                        s1[ri], y1[ri], w1[vkey][:, ri],
                        s2[bi], y2[bi], w2[wkey][:, bi],
                    )
                    total = (total + sign * val) % p
        return total


_WORKER_PROBLEM = None


def _worker_sigma(p):
    try:
        return p, _WORKER_PROBLEM.sigma_mod(p), None
    except BadPrime as exc:
        return p, None, exc.reason or "bad prime"


def _thread_count():
    env = os.environ.get("TINCALC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _input_bits(t: Tin) -> int:
    total = 0
    for x, y, z in t.vertices:
        for v in (x, y, z):
            total += int(v.numerator).bit_length() + int(v.denominator).bit_length()
    return total


def edge_term_sum_fast(
    fn: Tin, gn: Tin, f_edges=None, g_edges=None, *, mode="difference",
    initial_primes=None, prime_bits=31, threads=None, max_doublings=14,
) -> mpq:
    """Exact edge-crossing sum of a normalized pair via the prime basket."""
    if f_edges is None:
        f_edges = build_edge_data(fn)
    if g_edges is None:
        g_edges = build_edge_data(gn)
    f_int = [e for e in f_edges if not e.is_boundary]
    g_int = [e for e in g_edges if not e.is_boundary]
    fam = build_clique_cover(
        [(fn.xy(e.u), fn.xy(e.v)) for e in f_int],
        [(gn.xy(e.u), gn.xy(e.v)) for e in g_int],
    )
    if not fam.cliques:
        return mpq(0)
    problem = _EdgeSumProblem(
        _SideTable(fn, f_int), _SideTable(gn, g_int), fam, mode
    )
    adicity = problem.needed_two_adicity()
    if initial_primes is None:
        # the edge sum's numerator plus denominator empirically stays below
        # about 4/3 of the total input coordinate bits; undershoot is safe
        # because the verification prime triggers doubling
        bits = _input_bits(fn) + _input_bits(gn)
        initial_primes = max(8, 4 * bits // (3 * max(8, prime_bits - 1)))
    n_primes = max(2, int(initial_primes))

    basket = PrimeBasket(ntt_friendly_primes(n_primes, prime_bits, adicity))
    residues = {}
    threads = _thread_count() if threads is None else max(1, threads)

    for _round in range(max_doublings):
        todo = [p for p in basket.good() if p not in residues]
        for p, value, bad in _run_primes(todo, threads, problem):
            if bad is not None:
                basket.discard(p, bad)
            else:
                residues[p] = value
        try:
            return crt_reconstruct(residues, basket)
        except InsufficientPrimes:
            basket.extend(
                ntt_friendly_primes(
                    len(basket.primes), prime_bits, adicity, skip=set(basket.primes)
                )
            )
    raise InsufficientPrimes("edge sum failed to stabilize; basket kept growing")


def _run_primes(primes, threads, problem):
    global _WORKER_PROBLEM
    if not primes:
        return []
    _WORKER_PROBLEM = problem
    if threads <= 1 or len(primes) < 8 or counting.is_active():
        return [_worker_sigma(p) for p in primes]
    import multiprocessing as mp

    ctx = mp.get_context("fork")
    chunk = max(1, len(primes) // (threads * 8))
    with ctx.Pool(processes=threads) as pool:
        return list(pool.imap_unordered(_worker_sigma, primes, chunksize=chunk))


def inner_product_fast(
    f: Tin, g: Tin, *, seed=0, mode="difference", validate=True,
    initial_primes=None, prime_bits=31, threads=None,
) -> mpq:
    """Exact integral of f*g over the shared domain, the subquadratic way.

    Agrees with naive_inner_product bit for bit on every general-position
    pair.  ``validate`` runs the quadratic general-position screen first
    and raises DegenerateInput on violations; callers that already
    screened the pair (generators, benchmarks) switch it off.
    """
    if validate:
        report = validate_pair(f, g)
        if not report.ok:
            raise DegenerateInput(
                "; ".join(sorted({v.kind for v in report.violations}))
            )
    fn, gn, _rec = normalize_pair(f, g, seed=seed)
    f_edges = build_edge_data(fn)
    g_edges = build_edge_data(gn)
    sigma_v = vertex_term_sum(fn, gn, f_edges=f_edges, g_edges=g_edges)
    sigma_e = edge_term_sum_fast(
        fn, gn, f_edges, g_edges, mode=mode,
        initial_primes=initial_primes, prime_bits=prime_bits, threads=threads,
    )
    return sigma_v + sigma_e
