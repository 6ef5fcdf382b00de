import random

import pytest
from gmpy2 import mpq

from tincalc.errors import BadPrime, InsufficientPrimes
from tincalc.field import (
    Fp,
    PrimeBasket,
    crt_combine,
    crt_reconstruct,
    ntt_friendly_primes,
    rat_to_fp,
    rational_reconstruct,
    two_adic_root,
)


def test_rat_to_fp_basics():
    assert rat_to_fp(mpq(1, 2), 7) == 4
    with pytest.raises(BadPrime):
        rat_to_fp(mpq(1, 7), 7)


def test_rat_to_fp_roundtrip():
    rng = random.Random(1)
    primes = ntt_friendly_primes(4, bits=31)
    for _ in range(100):
        q = mpq(rng.randrange(-1000, 1001), rng.randrange(1, 1000))
        basket = PrimeBasket(primes)
        residues = {p: rat_to_fp(q, p) for p in primes}
        rec = crt_reconstruct(residues, basket)
        assert rec == q
        for p in primes:
            assert rat_to_fp(rec, p) == residues[p]


def test_ntt_friendly_primes_properties():
    ps = ntt_friendly_primes(8, bits=31, two_adicity=13)
    assert len(set(ps)) == 8
    for p in ps:
        assert (p - 1) % (1 << 13) == 0
        assert p < 1 << 31
        a, w = two_adic_root(p)
        assert a >= 13
        assert pow(w, 1 << a, p) == 1
        assert pow(w, 1 << (a - 1), p) == p - 1


def test_crt_combine_hand_case():
    value, modulus = crt_combine([2, 3], [5, 7])
    assert (value, modulus) == (17, 35)


def test_reconstruct_negative_fraction():
    primes = ntt_friendly_primes(4, bits=27)
    basket = PrimeBasket(primes)
    residues = {p: rat_to_fp(mpq(-1, 3), p) for p in primes}
    assert crt_reconstruct(residues, basket) == mpq(-1, 3)


def test_single_prime_insufficient():
    primes = ntt_friendly_primes(1, bits=27)
    basket = PrimeBasket(primes)
    with pytest.raises(InsufficientPrimes):
        crt_reconstruct({primes[0]: 3}, basket)


def test_reconstruction_bound_property():
    # any q with |num|, den < B reconstructs once prod > 2B^2
    rng = random.Random(9)
    primes = ntt_friendly_primes(3, bits=31)
    prod = 1
    for p in primes[:-1]:
        prod *= p
    bound = int((prod // 2) ** 0.5)
    for _ in range(50):
        num = rng.randrange(-bound // 2, bound // 2)
        den = rng.randrange(1, bound // 2)
        q = mpq(num, den)
        c, modulus = crt_combine(
            [rat_to_fp(q, p) for p in primes[:-1]], primes[:-1]
        )
        assert rational_reconstruct(c, modulus) == q


def test_discarded_primes_are_skipped():
    primes = ntt_friendly_primes(5, bits=27)
    basket = PrimeBasket(primes)
    basket.discard(primes[1], "denominator")
    residues = {p: rat_to_fp(mpq(22, 7), p) for p in primes}
    residues[primes[1]] = 0  # garbage; must not be consulted
    assert crt_reconstruct(residues, basket) == mpq(22, 7)
    assert primes[1] not in basket.good()


def test_field_axioms_random_triples():
    rng = random.Random(3)
    (p,) = ntt_friendly_primes(1, bits=27)
    for _ in range(200):
        a, b, c = (Fp(rng.randrange(p), p) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a
        if a.value != 0:
            assert a * a.inv() == Fp(1, p)


def test_verification_mismatch_detected():
    primes = ntt_friendly_primes(3, bits=27)
    basket = PrimeBasket(primes)
    residues = {p: rat_to_fp(mpq(5, 9), p) for p in primes}
    residues[primes[-1]] = (residues[primes[-1]] + 1) % primes[-1]
    with pytest.raises(InsufficientPrimes):
        crt_reconstruct(residues, basket)
