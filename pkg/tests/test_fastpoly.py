import random

from gmpy2 import mpq

from tincalc.fastpoly import (
    NEG_INF,
    FracSum,
    PrimeField,
    RationalField,
    degree,
    horner_eval,
    multipoint_eval,
    multipoint_multivar,
    poly_mul,
    sum_fractions,
    trim,
)
from tincalc.field import ntt_friendly_primes

PRIME = ntt_friendly_primes(1, bits=31, two_adicity=15)[0]
FP = PrimeField(PRIME)
QQ = RationalField()


def rand_poly(rng, n, field):
    if field is FP:
        return [rng.randrange(FP.p) for _ in range(n)]
    return [mpq(rng.randrange(-9, 10), rng.randrange(1, 5)) for _ in range(n)]


def schoolbook(a, b, field):
    a, b = trim(a), trim(b)
    if not a or not b:
        return []
    out = [field.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = field.add(out[i + j], field.mul(x, y))
    return trim(out)


def test_poly_mul_simple_cases():
    # (1 + X)(1 - X) = 1 - X^2 over the rationals
    got = poly_mul([mpq(1), mpq(1)], [mpq(1), mpq(-1)], QQ)
    assert got == [mpq(1), mpq(0), mpq(-1)]
    assert poly_mul([], [mpq(3), mpq(1)], QQ) == []
    assert degree([]) == NEG_INF


def test_ntt_mul_matches_schoolbook():
    rng = random.Random(11)
    for _ in range(4):
        a = rand_poly(rng, 1001, FP)
        b = rand_poly(rng, 999, FP)
        assert FP.poly_mul(a, b) == schoolbook(a, b, FP)


def test_mul_degree_additivity():
    rng = random.Random(12)
    for _ in range(10):
        a = trim(rand_poly(rng, rng.randrange(1, 60), FP))
        b = trim(rand_poly(rng, rng.randrange(1, 60), FP))
        if a and b:
            assert degree(FP.poly_mul(a, b)) == degree(a) + degree(b)


def test_big_prime_python_path():
    (p,) = ntt_friendly_primes(1, bits=62)
    f = PrimeField(p)
    rng = random.Random(5)
    a = [rng.randrange(p) for _ in range(40)]
    b = [rng.randrange(p) for _ in range(37)]
    assert f.poly_mul(a, b) == schoolbook(a, b, f)


def test_oversized_ntt_falls_back():
    # tiny 2-adicity forces the schoolbook route; result stays exact
    candidates = ntt_friendly_primes(40, bits=27, two_adicity=2)
    p = next(q for q in candidates if PrimeField(q).two_adicity <= 4)
    f = PrimeField(p)
    rng = random.Random(6)
    a = [rng.randrange(p) for _ in range(200)]
    b = [rng.randrange(p) for _ in range(180)]
    assert f.poly_mul(a, b) == schoolbook(a, b, f)


def test_divmod_prime_field():
    rng = random.Random(13)
    for _ in range(8):
        a = rand_poly(rng, rng.randrange(5, 120), FP)
        b = trim(rand_poly(rng, rng.randrange(2, 40), FP))
        if not b:
            continue
        q, r = FP.poly_divmod(a, b)
        back = [x % FP.p for x in FP.poly_mul(q, b)]
        full = list(back) + [0] * (len(a) - len(back))
        for i, c in enumerate(r):
            full[i] = (full[i] + c) % FP.p
        assert trim(full) == trim([c % FP.p for c in a])
        assert len(r) < len(b)


def test_multipoint_trivial():
    # X^2 at 0, 1, 2
    vals = multipoint_eval([0, 0, 1], [0, 1, 2], FP)
    assert vals == [0, 1, 4]
    assert multipoint_eval([0, 0, 1], [], FP) == []


def test_multipoint_matches_horner():
    rng = random.Random(14)
    a = rand_poly(rng, 513, FP)
    pts = [rng.randrange(FP.p) for _ in range(512)]
    fast = multipoint_eval(a, pts, FP)
    slow = [horner_eval(a, x, FP) for x in pts]
    assert fast == slow


def test_multipoint_rational_and_duplicates():
    a = [mpq(1), mpq(-2), mpq(1)]  # (X-1)^2
    pts = [mpq(1), mpq(1), mpq(3), mpq(1, 2)]
    assert multipoint_eval(a, pts, QQ) == [0, 0, 4, mpq(1, 4)]


def test_sum_fractions_hand_cases():
    # 1/X + 1/(X-1) = (2X - 1) / (X^2 - X)
    fs = sum_fractions([(mpq(1), mpq(0)), (mpq(1), mpq(1))], 1, QQ)
    assert fs.N == [mpq(-1), mpq(2)]
    assert fs.D == [mpq(0), mpq(-1), mpq(1)]
    # single term of order 2
    fs = sum_fractions([(mpq(1), mpq(1))], 2, QQ)
    assert fs.N == [mpq(1)]
    assert fs.D == [mpq(1), mpq(-2), mpq(1)]


def test_sum_fractions_evaluation_oracle():
    rng = random.Random(15)
    terms = [(rng.randrange(1, FP.p), rng.randrange(FP.p)) for _ in range(64)]
    d = 3
    fs = sum_fractions(terms, d, FP)
    for _ in range(10):
        x = rng.randrange(FP.p)
        if any((x - v) % FP.p == 0 for _u, v in terms):
            continue
        lhs = FP.mul(
            horner_eval(fs.N, x, FP), FP.inv(horner_eval(fs.D, x, FP))
        )
        rhs = 0
        for u, v in terms:
            rhs = (rhs + u * pow((x - v) % FP.p, (FP.p - 1) - d, FP.p)) % FP.p
        assert lhs == rhs


def test_sum_fractions_degree_bounds():
    rng = random.Random(16)
    for n, d in ((1, 1), (7, 2), (33, 3), (64, 1)):
        terms = [(rng.randrange(FP.p), rng.randrange(FP.p)) for _ in range(n)]
        fs = sum_fractions(terms, d, FP)
        assert degree(fs.N) <= (n - 1) * d
        assert degree(fs.D) <= n * d


def test_sum_fractions_denominator_is_pole_product():
    rng = random.Random(17)
    vs = random.Random(18).sample(range(FP.p), 9)
    terms = [(rng.randrange(1, FP.p), v) for v in vs]
    for d in (1, 2, 3):
        fs = sum_fractions(terms, d, FP)
        expect = [1]
        for v in vs:
            base = [(-v) % FP.p, 1]
            for _ in range(d):
                expect = FP.poly_mul(expect, base)
        assert fs.D == expect  # construction keeps it monic, exactly the product


def test_multipoint_multivar_cases():
    # P = X0^2 * X1 at given tuples
    coeffs = {(1,): [0, 0, 1]}
    pts = [(1, 1), (2, 3), (0, 5)]
    assert multipoint_multivar(coeffs, pts, FP) == [1, 12, 0]
    # r = 0 degenerates to plain multipoint evaluation
    coeffs0 = {(): [3, 1]}
    assert multipoint_multivar(coeffs0, [(4,), (0,)], FP) == [7, 3]


def test_multipoint_multivar_against_naive():
    rng = random.Random(19)
    r, dlow, n = 2, 4, 257
    coeffs = {}
    for _ in range(12):
        exps = tuple(rng.randrange(dlow + 1) for _ in range(r))
        coeffs[exps] = rand_poly(rng, n, FP)
    pts = [tuple(rng.randrange(FP.p) for _ in range(r + 1)) for _ in range(200)]
    got = multipoint_multivar(coeffs, pts, FP)
    for i, pt in enumerate(pts):
        want = 0
        for exps, poly in coeffs.items():
            term = horner_eval(poly, pt[0], FP)
            for vi, e in enumerate(exps):
                term = term * pow(pt[vi + 1], e, FP.p) % FP.p
            want = (want + term) % FP.p
        assert got[i] == want
