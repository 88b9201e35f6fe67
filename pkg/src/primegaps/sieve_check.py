"""Exact counting checks of the joint divisibility/coprimality product formula.

For a tuple of primes, the fraction of m <= n divisible by every tuple
member and by no prime in any member's gap interval is counted exactly
and compared against the predicted product of per-prime factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import primes as primes_mod
from .errors import EnumerationCapError
from .gap_counter import GapParameters
from .primes import PrimeTable

EXCLUDED_SET_CAP = 10**6
_COUNT_CHUNK = 1 << 20


@dataclass(frozen=True)
class JointDeltaQuery:
    """A tuple of up to three primes, a gap threshold, and a range bound."""

    primes: tuple[int, ...]
    z: float
    n: int

    def __post_init__(self):
        if not 1 <= len(self.primes) <= 3:
            raise ValueError("tuple must have 1 to 3 primes")
        prev = 1
        for p in self.primes:
            if p <= prev:
                raise ValueError("primes must be strictly increasing")
            if primes_mod.distinct_prime_divisors(p) != [p]:
                raise ValueError(f"{p} is not prime")
            prev = p
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.n > 10**9:
            raise ValueError("n capped at 1e9")

    @property
    def params(self) -> GapParameters:
        return GapParameters(self.z)


def _linked(q: JointDeltaQuery) -> bool:
    params = q.params
    return any(
        primes_mod.in_gap_interval(q.primes[i], q.primes[i + 1], params)
        for i in range(len(q.primes) - 1)
    )


def joint_predicted(q: JointDeltaQuery, table: PrimeTable) -> float:
    """Product of (1/p) * prod(1 - 1/q') over each tuple member's interval.

    Linked tuples (a member inside the previous member's interval) predict
    exactly zero, because the indicator at the smaller prime forbids the
    larger one.
    """
    if _linked(q):
        return 0.0
    params = q.params
    out = 1.0
    for p in q.primes:
        out *= math.exp(primes_mod.gap_interval_log_product(table, p, params)) / p
    return out


def _excluded_primes(q: JointDeltaQuery) -> list[int]:
    params = q.params
    t_max = params.exp_z * math.log(q.primes[-1])
    bound = int(math.floor(math.exp(t_max))) + 2
    if bound > 10**9:
        raise EnumerationCapError(f"gap intervals reach {bound}, past the supported range")
    qs = primes_mod.simple_sieve(bound)
    excluded: set[int] = set()
    for p in q.primes:
        t = params.exp_z * math.log(p)
        for cand in qs[np.searchsorted(qs, p, side="right"):]:
            c = int(cand)
            if math.log(c) <= t:
                excluded.add(c)
            else:
                break
    if len(excluded) > EXCLUDED_SET_CAP:
        raise EnumerationCapError(
            f"excluded prime set has {len(excluded)} members, cap is {EXCLUDED_SET_CAP}"
        )
    return sorted(excluded)


def joint_empirical(q: JointDeltaQuery) -> Fraction:
    """Exact fraction of m <= n divisible by the tuple, coprime to all intervals.

    Multiples of the tuple product are enumerated in chunks and filtered by
    residue against the (finite) excluded prime set; the count is exact.
    """
    excluded = _excluded_primes(q)
    step = math.prod(q.primes)
    if step > q.n:
        return Fraction(0, 1)
    count = 0
    total = q.n // step
    for start in range(0, total, _COUNT_CHUNK):
        ks = np.arange(start + 1, min(start + _COUNT_CHUNK, total) + 1, dtype=np.int64)
        ms = ks * step
        alive = np.ones(ms.size, dtype=bool)
        for e in excluded:
            alive &= ms % e != 0
        count += int(alive.sum())
    return Fraction(count, q.n)
