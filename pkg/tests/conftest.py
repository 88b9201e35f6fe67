import pytest

import primegaps as pg

# Frozen test-suite constants (envelopes and caps validated once, then pinned).
MOMENT_ENVELOPE_C = 4          # bound constant for centered-moment products
SIEVE_ENVELOPE_REL = 0.05      # relative part of the count-vs-product envelope
SIEVE_ENVELOPE_ABS_COEF = 10   # coefficient of n^(-1/2) in the same envelope
ASYMPTOTIC_SLACK = 1.5         # |exact - limiting| bound for model mean/variance
MERTENS_CONSTANT = 0.2615


@pytest.fixture(scope="session")
def table_1e5():
    return pg.build_prime_table(10**5)


@pytest.fixture(scope="session")
def table_1e6():
    return pg.build_prime_table(10**6)


@pytest.fixture(scope="session")
def table_1e7():
    return pg.build_prime_table(10**7)


@pytest.fixture(scope="session")
def table_1e8():
    return pg.build_prime_table(10**8)
