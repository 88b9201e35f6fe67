import math
from fractions import Fraction

import pytest

import primegaps as pg
from primegaps.errors import EnumerationCapError

from conftest import SIEVE_ENVELOPE_ABS_COEF, SIEVE_ENVELOPE_REL

LN2 = math.log(2.0)


class TestQueryValidation:
    def test_rejects_composite(self):
        with pytest.raises(ValueError):
            pg.JointDeltaQuery(primes=(4,), z=0.0, n=100)

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            pg.JointDeltaQuery(primes=(5, 3), z=0.0, n=100)

    def test_rejects_long_tuple(self):
        with pytest.raises(ValueError):
            pg.JointDeltaQuery(primes=(2, 3, 5, 7), z=0.0, n=100)


class TestEmpirical:
    def test_divisibility_only_at_z0(self):
        q = pg.JointDeltaQuery(primes=(2,), z=0.0, n=100)
        assert pg.joint_empirical(q) == Fraction(50, 100)

    def test_exclusion_of_three(self):
        q = pg.JointDeltaQuery(primes=(2,), z=LN2, n=100)
        got = pg.joint_empirical(q)
        brute = sum(1 for m in range(2, 101, 2) if m % 3 != 0)
        assert brute == 34
        assert got == Fraction(34, 100)

    def test_linked_tuple_is_zero(self):
        for pair in [(2, 3), (3, 5), (5, 7), (7, 11)]:
            q = pg.JointDeltaQuery(primes=pair, z=LN2, n=10**5)
            assert pg.joint_empirical(q) == 0

    def test_brute_force_pair(self):
        q = pg.JointDeltaQuery(primes=(3, 11), z=LN2, n=3000)
        got = pg.joint_empirical(q)
        params = pg.GapParameters(LN2)
        brute = 0
        for m in range(33, 3001, 33):
            divs = pg.distinct_prime_divisors(m)
            ok = all(
                not any(pg.in_gap_interval(p, d, params) for d in divs)
                for p in (3, 11)
            )
            brute += ok
        assert got == Fraction(brute, 3000)

    def test_refuses_giant_exclusion_set(self):
        # (2, 2^24.x] holds well over 1e6 primes
        q = pg.JointDeltaQuery(primes=(2,), z=math.log(24.3), n=10**6)
        with pytest.raises(EnumerationCapError):
            pg.joint_empirical(q)


class TestPredicted:
    def test_u1_equals_model_h(self, table_1e6):
        for p in (2, 3, 5, 97):
            for z in (0.0, LN2):
                q = pg.JointDeltaQuery(primes=(p,), z=z, n=100)
                assert pg.joint_predicted(q, table_1e6) == pg.model_h(
                    p, pg.GapParameters(z), table_1e6
                )

    def test_z0_reciprocal(self, table_1e6):
        q = pg.JointDeltaQuery(primes=(7,), z=0.0, n=100)
        assert pg.joint_predicted(q, table_1e6) == pytest.approx(1 / 7, rel=1e-14)

    def test_pair_2_11(self, table_1e6):
        # second factor runs over the full gap interval of 11, i.e. (11, 121]
        q = pg.JointDeltaQuery(primes=(2, 11), z=LN2, n=100)
        expected = Fraction(1, 3) * Fraction(1, 11)
        for prime in pg.simple_sieve(121).tolist():
            if 11 < prime <= 121:
                expected *= Fraction(prime - 1, prime)
        assert pg.joint_predicted(q, table_1e6) == pytest.approx(float(expected), rel=1e-10)

    def test_linked_is_zero(self, table_1e6):
        q = pg.JointDeltaQuery(primes=(2, 3), z=LN2, n=100)
        assert pg.joint_predicted(q, table_1e6) == 0.0


def test_envelope_at_unit_scale(table_1e6):
    n = 10**6
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    for z in (0.0, LN2):
        params = pg.GapParameters(z)
        queries = [(p,) for p in primes]
        queries += [
            (p1, p2)
            for i, p1 in enumerate(primes)
            for p2 in primes[i + 1 :]
            if not pg.in_gap_interval(p1, p2, params)
        ]
        for tup in queries:
            q = pg.JointDeltaQuery(primes=tup, z=z, n=n)
            pred = pg.joint_predicted(q, table_1e6)
            emp = float(pg.joint_empirical(q))
            envelope = SIEVE_ENVELOPE_REL * pred + SIEVE_ENVELOPE_ABS_COEF / math.sqrt(n)
            assert abs(emp - pred) <= envelope, (tup, z, emp, pred)
