"""Fast univariate polynomial arithmetic over a coefficient field.

Two backends share one protocol: an exact rational field (schoolbook
everything, used by oracles and small tests) and word-size prime fields.
Prime fields below 2^31 run a numpy-vectorized iterative NTT; larger ones
fall back to python-integer kernels.  When a requested transform length
exceeds the prime's 2-adic torsion the multiplication silently degrades
to schoolbook, it is never an error.

Polynomials are dense coefficient sequences, lowest degree first, with
trailing zeros trimmed; the zero polynomial is the empty sequence and its
degree is the -inf sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from gmpy2 import mpq

from . import counting
from .field import two_adic_root

NEG_INF = float("-inf")

_SCHOOLBOOK_CUTOFF = 16


def trim(a):
    n = len(a)
    while n and not a[n - 1]:
        n -= 1
    return a[:n] if n != len(a) else a


def degree(a):
    a = trim(a)
    return len(a) - 1 if a else NEG_INF


class RationalField:
    """Exact rational coefficients; schoolbook kernels."""

    name = "rational"
    zero = mpq(0)
    one = mpq(1)

    def coerce(self, x):
        return mpq(x)

    def neg(self, x):
        return -x

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def mul(self, x, y):
        return x * y

    def div(self, x, y):
        return x / y

    def poly_mul(self, a, b):
        a, b = trim(a), trim(b)
        if not a or not b:
            return []
        counting.add("rat", len(a) * len(b) * 2)
        out = [mpq(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return trim(out)

    def poly_divmod(self, a, b):
        a, b = list(trim(a)), trim(b)
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        if len(a) < len(b):
            return [], a
        counting.add("rat", (len(a) - len(b) + 1) * len(b) * 2)
        q = [mpq(0)] * (len(a) - len(b) + 1)
        lead = b[-1]
        for i in range(len(q) - 1, -1, -1):
            c = a[i + len(b) - 1] / lead
            q[i] = c
            if c != 0:
                for j, bc in enumerate(b):
                    a[i + j] -= c * bc
        return trim(q), trim(a[: len(b) - 1])

    def poly_mod(self, a, b):
        return self.poly_divmod(a, b)[1]


class PrimeField:
    """Arithmetic modulo a word-size NTT-friendly prime."""

    name = "prime"

    def __init__(self, p):
        self.p = int(p)
        self.two_adicity, self.root = two_adic_root(self.p)
        self.max_ntt = 1 << self.two_adicity
        self.use_numpy = self.p < (1 << 31)
        self.zero = 0
        self.one = 1
        self._tw = {}
        self._rev = {}

    # scalar protocol
    def coerce(self, x):
        return int(x) % self.p

    def neg(self, x):
        return (-x) % self.p

    def add(self, x, y):
        counting.add("fp")
        return (x + y) % self.p

    def sub(self, x, y):
        counting.add("fp")
        return (x - y) % self.p

    def mul(self, x, y):
        counting.add("fp")
        return x * y % self.p

    def inv(self, x):
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        counting.add("fp", 32)
        return pow(x, self.p - 2, self.p)

    def div(self, x, y):
        return self.mul(x, self.inv(y))

    # NTT machinery
    def _bitrev(self, n):
        rev = self._rev.get(n)
        if rev is None:
            logn = n.bit_length() - 1
            rev = np.zeros(n, dtype=np.int64)
            for i in range(1, n):
                rev[i] = (rev[i >> 1] >> 1) | ((i & 1) << (logn - 1))
            self._rev[n] = rev
        return rev

    def _stage_twiddles(self, n, invert):
        key = (n, invert)
        tw = self._tw.get(key)
        if tw is None:
            w_n = pow(self.root, self.max_ntt // n, self.p)
            if invert:
                w_n = pow(w_n, self.p - 2, self.p)
            tw = []
            m = 2
            while m <= n:
                w = pow(w_n, n // m, self.p)
                row = np.empty(m // 2, dtype=np.uint64)
                acc = 1
                for j in range(m // 2):
                    row[j] = acc
                    acc = acc * w % self.p
                tw.append(row)
                m <<= 1
            self._tw[key] = tw
        return tw

    def ntt(self, a, invert=False):
        """Iterative radix-2 transform; a has shape (..., L), L a power of
        two not exceeding the prime's torsion.  Returns a new array."""
        p = self.p
        L = a.shape[-1]
        logL = L.bit_length() - 1
        batch = int(np.prod(a.shape[:-1], dtype=np.int64)) if a.ndim > 1 else 1
        counting.add("fp", batch * (L // 2 * logL + L * logL))
        out = np.ascontiguousarray(a[..., self._bitrev(L)])
        flat = out.reshape(-1, L)
        for s, wrow in enumerate(self._stage_twiddles(L, invert)):
            m = 2 << s
            half = m >> 1
            view = flat.reshape(flat.shape[0], L // m, m)
            u = view[..., :half]
            t = view[..., half:] * wrow % p
            hi = (u + np.uint64(p) - t) % p
            np.add(u, t, out=view[..., :half])
            view[..., :half] %= p
            view[..., half:] = hi
        if invert:
            n_inv = pow(L, p - 2, p)
            flat *= np.uint64(n_inv)
            flat %= p
            counting.add("fp", batch * L)
        return out

    def _conv_numpy(self, a, b):
        """Schoolbook convolution via 16-bit limb splitting (no overflow)."""
        p = self.p
        counting.add("fp", 2 * len(a) * len(b))
        a = np.asarray(a, dtype=np.uint64)
        b = np.asarray(b, dtype=np.uint64)
        al, ah = a & np.uint64(0xFFFF), a >> np.uint64(16)
        bl, bh = b & np.uint64(0xFFFF), b >> np.uint64(16)
        c0 = np.convolve(al, bl)
        c1 = (np.convolve(al, bh) + np.convolve(ah, bl)) % p
        c2 = np.convolve(ah, bh) % p
        return (c0 + (c1 << np.uint64(16)) + (c2 << np.uint64(32))) % p

    def poly_mul(self, a, b):
        """Exact product of coefficient lists; NTT when lengths allow."""
        a, b = trim(a), trim(b)
        if not a or not b:
            return []
        n = len(a) + len(b) - 1
        if not self.use_numpy:
            counting.add("fp", 2 * len(a) * len(b))
            p = self.p
            out = [0] * n
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        out[i + j] = (out[i + j] + x * y) % p
            return trim(out)
        if min(len(a), len(b)) <= _SCHOOLBOOK_CUTOFF or (1 << (n - 1).bit_length()) > self.max_ntt:
            return trim(self._conv_numpy(a, b).tolist())
        L = 1 << (n - 1).bit_length()
        fa = np.zeros(L, dtype=np.uint64)
        fb = np.zeros(L, dtype=np.uint64)
        fa[: len(a)] = a
        fb[: len(b)] = b
        fa = self.ntt(fa)
        fb = self.ntt(fb)
        fa = fa * fb % self.p
        counting.add("fp", L)
        res = self.ntt(fa, invert=True)
        return trim(res[:n].tolist())

    def inv_series(self, f, n):
        """Power-series inverse of f (f[0] != 0) modulo X^n, by Newton."""
        g = [pow(int(f[0]), self.p - 2, self.p)]
        k = 1
        while k < n:
            k <<= 1
            fg = self.poly_mul(list(f[:k]), g)[:k]
            e = [(2 - fg[0]) % self.p] + [(-c) % self.p for c in fg[1:]]
            g = self.poly_mul(g, e)[:k]
        return g[:n]

    def poly_divmod(self, a, b):
        a, b = trim(a), trim(b)
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        if len(a) < len(b):
            return [], list(a)
        n = len(a) - len(b) + 1
        inv = self.inv_series(b[::-1], n)
        q_rev = self.poly_mul(a[::-1][: len(a)], inv)[:n]
        q = q_rev[::-1]
        if len(q) < n:  # leading quotient zeros were trimmed; restore order
            q = [0] * (n - len(q)) + q
        qb = self.poly_mul(q, b)
        r = [(x - y) % self.p for x, y in zip(a, qb)] + list(a[len(qb):])
        return trim(q), trim(r[: len(b) - 1])

    def poly_mod(self, a, b):
        return self.poly_divmod(a, b)[1]


def poly_mul(a, b, field):
    """Exact polynomial product over the field backend."""
    return field.poly_mul(a, b)


def horner_eval(a, x, field):
    acc = field.zero
    for c in reversed(trim(a)):
        acc = field.add(field.mul(acc, x), c)
    return acc


def _subproduct_tree(pts, field):
    layer = [[field.neg(x), field.one] for x in pts]
    tree = [layer]
    while len(layer) > 1:
        nxt = []
        for i in range(0, len(layer) - 1, 2):
            nxt.append(field.poly_mul(layer[i], layer[i + 1]))
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
        tree.append(layer)
    return tree


def multipoint_eval(a, pts, field):
    """Values of a at every point, via subproduct and remainder trees."""
    pts = list(pts)
    if not pts:
        return []
    a = trim(a)
    if len(a) <= 1:
        c = a[0] if a else field.zero
        return [c] * len(pts)
    tree = _subproduct_tree(pts, field)
    rems = [field.poly_mod(a, tree[-1][0])]
    for layer in reversed(tree[:-1]):
        # each parent k owns children 2k and 2k+1; an odd tail node was
        # carried up unchanged and passes its remainder straight through
        nxt = []
        for k, parent_rem in enumerate(rems):
            left = 2 * k
            right = 2 * k + 1
            if right < len(layer):
                nxt.append(field.poly_mod(parent_rem, layer[left]))
                nxt.append(field.poly_mod(parent_rem, layer[right]))
            elif left < len(layer):
                nxt.append(parent_rem)
        rems = nxt
    out = []
    for r in rems:
        out.append(r[0] if r else field.zero)
    return out


@dataclass
class FracSum:
    """Numerator/denominator pair representing a sum of simple fractions."""

    N: list
    D: list


def sum_fractions(terms, d, field) -> FracSum:
    """Combine sum of u_e / (X - v_e)^d into a single rational function.

    Pairwise divide and conquer; every combine does three polynomial
    multiplications.  Degree bounds: deg N <= (n-1)d, deg D <= nd.
    """
    if d < 1:
        raise ValueError("order must be at least 1")
    items = []
    for u, v in terms:
        base = [field.neg(field.coerce(v)), field.one]
        den = base
        for _ in range(d - 1):
            den = field.poly_mul(den, base)
        items.append((trim([field.coerce(u)]), den))
    if not items:
        return FracSum([], [field.one])
    while len(items) > 1:
        nxt = []
        for i in range(0, len(items) - 1, 2):
            n1, d1 = items[i]
            n2, d2 = items[i + 1]
            num = _poly_add(
                field.poly_mul(n1, d2), field.poly_mul(n2, d1), field
            )
            nxt.append((num, field.poly_mul(d1, d2)))
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    n, dd = items[0]
    return FracSum(trim(n), trim(dd))


def _poly_add(a, b, field):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = field.add(out[i], c)
    return trim(out)


def multipoint_multivar(coeffs, pts, field):
    """Evaluate P(X0, X1..Xr) at many points.

    ``coeffs`` maps exponent tuples over X1..Xr to coefficient polynomials
    in X0.  Expansion by the low-degree variables keeps one multipoint
    evaluation per monomial, then values combine per point.
    """
    pts = list(pts)
    if not pts:
        return []
    x0s = [pt[0] for pt in pts]
    out = [field.zero] * len(pts)
    for exps, poly in coeffs.items():
        vals = multipoint_eval(poly, x0s, field)
        for i, pt in enumerate(pts):
            term = vals[i]
            for var_idx, e in enumerate(exps):
                if e:
                    term = field.mul(term, _pow(field, pt[var_idx + 1], e))
            out[i] = field.add(out[i], term)
    return out


def _pow(field, x, e):
    acc = field.one
    base = x
    while e:
        if e & 1:
            acc = field.mul(acc, base)
        base = field.mul(base, base)
        e >>= 1
    return acc
