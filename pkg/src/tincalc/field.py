"""Coefficient-field plumbing: NTT-friendly primes, CRT, rational recovery.

The fast path computes the edge-crossing sum modulo a basket of word-size
primes and recovers the exact rational by Chinese remaindering plus
rational reconstruction.  One good prime is always held out of the
combination and used to verify the reconstructed value; a mismatch (or a
failed reconstruction) signals that the basket is too small and the caller
doubles it.  Primes where any denominator of the computation vanishes are
discarded wholesale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpq, mpz

from .errors import BadPrime, InsufficientPrimes


@dataclass(frozen=True)
class Fp:
    """A residue tagged with its prime; convenience type for small code
    paths and the field-axiom tests (bulk work uses raw arrays)."""

    value: int
    p: int

    def _coerce(self, other):
        if isinstance(other, Fp):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return other.value
        return int(other) % self.p

    def __add__(self, other):
        return Fp((self.value + self._coerce(other)) % self.p, self.p)

    def __sub__(self, other):
        return Fp((self.value - self._coerce(other)) % self.p, self.p)

    def __mul__(self, other):
        return Fp((self.value * self._coerce(other)) % self.p, self.p)

    def inv(self):
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero residue")
        return Fp(pow(self.value, self.p - 2, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o == 0:
            raise ZeroDivisionError
        return Fp((self.value * pow(o, self.p - 2, self.p)) % self.p, self.p)

    def __eq__(self, other):
        return isinstance(other, Fp) and (self.value, self.p) == (other.value, other.p)


def rat_to_fp(r, p) -> int:
    """Residue of an exact rational; BadPrime when the denominator dies."""
    r = mpq(r)
    den = int(r.denominator) % p
    if den == 0:
        raise BadPrime(p, "denominator divisible by prime")
    return (int(r.numerator) % p) * pow(den, p - 2, p) % p


def ntt_friendly_primes(count, bits=31, two_adicity=13, skip=()):
    """Primes p = k*2^a + 1 just below 2^bits, descending, deterministic."""
    if not 16 <= bits <= 62:
        raise ValueError("prime size must be between 16 and 62 bits")
    step = 1 << two_adicity
    skip = set(skip)
    out = []
    k = ((1 << bits) - 2) // step
    while len(out) < count and k > 0:
        p = k * step + 1
        if p < (1 << (bits - 1)):
            raise InsufficientPrimes(
                f"prime pool below 2^{bits} with 2-adicity {two_adicity} exhausted"
            )
        if p not in skip and gmpy2.is_prime(p):
            out.append(p)
        k -= 1
    return out


def two_adic_root(p):
    """(a, w): p - 1 = odd * 2^a and w generates the 2^a-torsion."""
    a = (p - 1 & -(p - 1)).bit_length() - 1
    odd = (p - 1) >> a
    g = 2
    while True:
        w = pow(g, odd, p)
        if pow(w, 1 << (a - 1), p) == p - 1:
            return a, w
        g += 1


class PrimeBasket:
    """Ordered prime collection with per-prime status."""

    def __init__(self, primes):
        self.primes = list(primes)
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("duplicate primes")
        self.status = {p: "ok" for p in self.primes}

    def discard(self, p, reason="bad"):
        self.status[p] = f"discarded({reason})"

    def good(self):
        return [p for p in self.primes if self.status[p] == "ok"]

    def extend(self, primes):
        for p in primes:
            if p in self.status:
                raise ValueError(f"prime {p} already present")
            self.primes.append(p)
            self.status[p] = "ok"


def crt_combine(residues, moduli):
    """Integer in [0, prod) matching every residue; divide and conquer."""
    items = [(mpz(r % m), mpz(m)) for r, m in zip(residues, moduli)]
    if not items:
        raise ValueError("no residues")
    while len(items) > 1:
        nxt = []
        for i in range(0, len(items) - 1, 2):
            x1, m1 = items[i]
            x2, m2 = items[i + 1]
            t = (x2 - x1) * gmpy2.invert(m1, m2) % m2
            nxt.append((x1 + m1 * t, m1 * m2))
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return int(items[0][0]), int(items[0][1])


def rational_reconstruct(c, modulus) -> mpq:
    """Recover n/d with |n|, d <= sqrt(modulus/2) from c mod modulus."""
    c = int(c) % int(modulus)
    m = int(modulus)
    if c == 0:
        return mpq(0)
    bound = math.isqrt((m - 1) // 2)
    r0, t0 = m, 0
    r1, t1 = c, 1
    while r1 > bound:
        q_ = r0 // r1
        r0, r1 = r1, r0 - q_ * r1
        t0, t1 = t1, t0 - q_ * t1
    if r1 == 0 or abs(t1) > bound or math.gcd(abs(t1), m) != 1:
        raise InsufficientPrimes("rational reconstruction failed at this modulus")
    num = r1 if t1 > 0 else -r1
    den = abs(t1)
    return mpq(num, den)


def crt_reconstruct(residues, basket: PrimeBasket) -> mpq:
    """Reconstruct the exact rational from per-prime residues.

    ``residues`` maps prime -> residue for at least every good prime.  The
    last good prime is held out: the reconstructed value must map back to
    its residue or InsufficientPrimes is raised so the caller can grow the
    basket.
    """
    good = basket.good()
    if len(good) < 2:
        raise InsufficientPrimes("need at least two good primes, one held out")
    holdout = good[-1]
    use = good[:-1]
    value, modulus = crt_combine([residues[p] for p in use], use)
    result = rational_reconstruct(value, modulus)
    if int(result.denominator) % holdout == 0:
        raise InsufficientPrimes("verification prime divides the denominator")
    if rat_to_fp(result, holdout) != residues[holdout] % holdout:
        raise InsufficientPrimes("verification residue mismatch")
    return result
