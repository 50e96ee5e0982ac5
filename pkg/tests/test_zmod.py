import itertools
import random

import pytest

from stabctx.zmod import (
    ArityMismatch,
    DicksonClassification,
    Modulus,
    PolyParseError,
    UnsupportedModulus,
    ZdPoly,
    ZeroInverse,
    dickson_classify,
    eval_poly,
    inv,
    is_permutation_polynomial,
    parse_poly,
)


def poly1(m, *coeffs):
    """Single-variable polynomial from (exponent, coeff) pairs."""
    return ZdPoly(m, 1, {(e,): c for e, c in coeffs})


class TestModulus:
    def test_accepts_odd_primes(self):
        for d in (3, 5, 7, 11, 13):
            assert Modulus(d).d == d

    @pytest.mark.parametrize("bad", [1, 2, 4, 6, 9, 15, 21, -3, 0])
    def test_rejects_non_odd_primes(self, bad):
        with pytest.raises(UnsupportedModulus):
            Modulus(bad)

    def test_inv2(self):
        for d in (3, 5, 7, 11):
            assert 2 * Modulus(d).inv2 % d == 1


class TestInv:
    def test_inv_2_mod_5(self):
        assert inv(2, Modulus(5)) == 3

    def test_inv_identity(self):
        assert inv(1, Modulus(7)) == 1

    def test_inv_zero_raises(self):
        with pytest.raises(ZeroInverse):
            inv(0, Modulus(5))

    def test_inv_exhaustive(self):
        for d in (3, 5, 7, 11):
            m = Modulus(d)
            for a in range(1, d):
                assert a * inv(a, m) % d == 1


class TestEval:
    def test_example_j2k(self):
        m = Modulus(3)
        p = ZdPoly(m, 2, {(2, 1): 1})
        assert eval_poly(p, (2, 2)) == 2

    def test_zero_poly(self):
        m = Modulus(5)
        p = ZdPoly.zero(m, 2)
        for pt in itertools.product(range(5), repeat=2):
            assert eval_poly(p, pt) == 0

    def test_cube(self):
        m = Modulus(5)
        p = ZdPoly(m, 1, {(3,): 1})
        assert eval_poly(p, (2,)) == 3

    def test_arity_mismatch(self):
        m = Modulus(5)
        p = ZdPoly(m, 2, {(1, 1): 1})
        with pytest.raises(ArityMismatch):
            eval_poly(p, (1,))


class TestRingOps:
    def test_canonical_form_drops_zeros(self):
        m = Modulus(5)
        p = ZdPoly(m, 1, {(2,): 5, (1,): 3})
        assert (2,) not in p.coeffs
        assert p.coeff((1,)) == 3

    def test_add_mul_against_evaluation(self):
        rng = random.Random(0)
        m = Modulus(7)
        for _ in range(50):
            a = ZdPoly(m, 2, {(rng.randrange(3), rng.randrange(3)): rng.randrange(7)
                              for _ in range(4)})
            b = ZdPoly(m, 2, {(rng.randrange(3), rng.randrange(3)): rng.randrange(7)
                              for _ in range(4)})
            pt = (rng.randrange(7), rng.randrange(7))
            assert (a + b).evaluate(pt) == (a.evaluate(pt) + b.evaluate(pt)) % 7
            assert (a * b).evaluate(pt) == a.evaluate(pt) * b.evaluate(pt) % 7
            assert (a - b).evaluate(pt) == (a.evaluate(pt) - b.evaluate(pt)) % 7

    def test_substitute_matches_composition(self):
        m = Modulus(5)
        phi = parse_poly("j^2*k + 2*j*k^2", m)
        x = ZdPoly.variable(m, 0, 2)
        y = ZdPoly.variable(m, 1, 2)
        sub = phi.substitute([2 - y, x + 1])
        for j in range(5):
            for k in range(5):
                assert sub.evaluate((j, k)) == phi.evaluate(((2 - k) % 5, (j + 1) % 5))

    def test_fermat_reduce(self):
        m = Modulus(3)
        p = poly1(m, (3, 1), (1, 1))  # x^3 + x acts as 2x
        r = p.fermat_reduce()
        assert r.coeffs == {(1,): 2}


class TestTextForm:
    def test_round_trip_canonical(self):
        m = Modulus(5)
        text = "2*j^2*k + 4*j*k^2 + 1"
        assert str(parse_poly(text, m)) == text

    def test_minus_normalizes(self):
        m = Modulus(5)
        assert str(parse_poly("x^3 - x", m, variables=("x",))) == "x^3 + 4*x"

    def test_zero(self):
        m = Modulus(5)
        assert str(parse_poly("0", m)) == "0"

    def test_bare_monomial(self):
        m = Modulus(5)
        p = parse_poly("j^2*k", m)
        assert p.coeffs == {(2, 1): 1}

    def test_reject_garbage(self):
        m = Modulus(5)
        for bad in ("j +", "2**k", "j^", "q^2", "j 2"):
            with pytest.raises(PolyParseError):
                parse_poly(bad, m)

    def test_parse_random_round_trip(self):
        rng = random.Random(1)
        m = Modulus(7)
        for _ in range(30):
            p = ZdPoly(m, 2, {(rng.randrange(4), rng.randrange(4)): rng.randrange(7)
                              for _ in range(5)})
            assert parse_poly(str(p), m).coeffs == p.coeffs


class TestPermutationPolynomial:
    def test_identity_permutes(self):
        m = Modulus(3)
        assert is_permutation_polynomial(poly1(m, (1, 1)))

    def test_square_does_not(self):
        m = Modulus(5)
        assert not is_permutation_polynomial(poly1(m, (2, 1)))

    def test_cube_at_5(self):
        # 5 = 2 mod 3, so cubing is a bijection
        m = Modulus(5)
        assert is_permutation_polynomial(poly1(m, (3, 1)))

    def test_translation_invariance(self):
        rng = random.Random(2)
        for d in (3, 5):
            m = Modulus(d)
            for _ in range(20):
                p = ZdPoly(m, 2, {(rng.randrange(3), rng.randrange(3)): rng.randrange(d)
                                  for _ in range(4)})
                base = is_permutation_polynomial(p)
                for c in range(d):
                    assert is_permutation_polynomial(p + c) == base

    def test_split_sums(self):
        # p(x,y) = p1(x) + p2(y) with p1 a permutation polynomial is one too
        rng = random.Random(3)
        for d in (3, 5):
            m = Modulus(d)
            for _ in range(20):
                a = rng.randrange(1, d)
                p1 = ZdPoly(m, 2, {(1, 0): a})
                p2 = ZdPoly(m, 2, {(0, rng.randrange(4)): rng.randrange(d),
                                   (0, 2): rng.randrange(d)})
                assert is_permutation_polynomial(p1 + p2)


class TestDickson:
    def test_cube_plus_one(self):
        m = Modulus(5)
        res = dickson_classify(poly1(m, (3, 1), (0, 1)))
        assert res == DicksonClassification(True, (1, "x^3", 0, 1))

    def test_linear(self):
        m = Modulus(5)
        res = dickson_classify(poly1(m, (1, 2), (0, 3)))
        assert res == DicksonClassification(True, (2, "x", 0, 3))

    def test_d7_refused(self):
        m = Modulus(7)
        p = poly1(m, (3, 1))
        with pytest.raises(UnsupportedModulus):
            dickson_classify(p)
        # fallback histogram decides: x^3 is not a bijection mod 7
        assert not is_permutation_polynomial(p)

    def test_normal_form_reconstructs(self):
        m = Modulus(5)
        rng = random.Random(4)
        for _ in range(100):
            p = poly1(m, (3, rng.randrange(5)), (2, rng.randrange(5)),
                      (1, rng.randrange(5)), (0, rng.randrange(5)))
            res = dickson_classify(p)
            if res.normal_form is None:
                continue
            a, g, b, c = res.normal_form
            e = 3 if g == "x^3" else 1
            for x in range(5):
                assert p.evaluate((x,)) == (a * pow(x + b, e, 5) + c) % 5

    @pytest.mark.parametrize("d", [3, 5])
    def test_exhaustive_agreement(self, d):
        m = Modulus(d)
        for e3, e2, e1, e0 in itertools.product(range(d), repeat=4):
            p = poly1(m, (3, e3), (2, e2), (1, e1), (0, e0))
            assert dickson_classify(p).is_permutation == is_permutation_polynomial(p)

    @pytest.mark.parametrize("d", [7, 11])
    def test_random_agreement(self, d):
        # d=7 is 1 mod 3: the classifier refuses, only the histogram applies;
        # d=11 is 2 mod 3: classifier and histogram must agree on the sample.
        m = Modulus(d)
        rng = random.Random(d)
        for _ in range(10_000):
            p = poly1(m, (3, rng.randrange(d)), (2, rng.randrange(d)),
                      (1, rng.randrange(d)), (0, rng.randrange(d)))
            if d % 3 == 1:
                with pytest.raises(UnsupportedModulus):
                    dickson_classify(p)
                break
            assert dickson_classify(p).is_permutation == is_permutation_polynomial(p)
