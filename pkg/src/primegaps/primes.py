"""Prime generation, gap-interval queries, and prefix-sum machinery.

A :class:`PrimeTable` holds all primes up to a limit together with
compensated prefix sums of 1/p and log(1 - 1/p), so that every
Mertens-type sum or product over a prime range is an O(1) difference
after the one-time sieve.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import CacheFormatError, HeadroomError

if TYPE_CHECKING:
    from .gap_counter import GapParameters

CACHE_MAGIC = b"PGT1"
CACHE_VERSION = 1


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (plain sieve, no table)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def _odd_sieve(limit: int) -> np.ndarray:
    """Primes <= limit via an odd-only sieve (index i represents 2i + 1)."""
    if limit < 3:
        return np.array([2], dtype=np.int64)
    n_odd = (limit + 1) // 2
    mask = np.ones(n_odd, dtype=bool)
    mask[0] = False  # 1
    for p in range(3, math.isqrt(limit) + 1, 2):
        if mask[p // 2]:
            mask[p * p // 2 :: p] = False
    odd_primes = 2 * np.flatnonzero(mask).astype(np.int64) + 1
    return np.concatenate((np.array([2], dtype=np.int64), odd_primes))


def smallest_prime_factor_table(limit: int) -> np.ndarray:
    """spf[m] = smallest prime factor of m (0 for m < 2); int32, limit < 2^31."""
    if limit >= 2**31:
        raise ValueError("spf table limited to int32 range")
    spf = np.zeros(limit + 1, dtype=np.int32)
    if limit >= 2:
        spf[2::2] = 2
    for p in range(3, math.isqrt(limit) + 1, 2):
        if spf[p] == 0:
            spf[p] = p
            view = spf[p * p :: 2 * p]
            view[view == 0] = p
    rest = np.flatnonzero(spf[3:] == 0).astype(np.int64) + 3
    spf[rest] = rest
    return spf


def distinct_prime_divisors(m: int) -> list[int]:
    """Distinct prime divisors of m in increasing order, by trial division."""
    if m < 1:
        raise ValueError("m must be positive")
    out = []
    if m % 2 == 0:
        out.append(2)
        while m % 2 == 0:
            m //= 2
    d = 3
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 2
    if m > 1:
        out.append(m)
    return out


@dataclass(frozen=True)
class PrimeTable:
    """Immutable prime table with compensated prefix sums.

    ``inv_prefix[i]`` is the running sum of 1/p over ``primes[:i+1]`` and
    ``log1m_prefix[i]`` the running sum of log(1 - 1/p).  The ``*_resid``
    arrays carry the float64 rounding residue of each prefix entry
    (the prefixes are accumulated in extended precision and stored as
    value + residue pairs), so range sums keep ~15 significant digits
    even across millions of terms.
    """

    limit: int
    primes: np.ndarray
    inv_prefix: np.ndarray
    log1m_prefix: np.ndarray
    inv_resid: np.ndarray = field(repr=False)
    log1m_resid: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.primes)

    def count_leq(self, x: float) -> int:
        """Number of table primes <= x."""
        return int(np.searchsorted(self.primes, x, side="right"))

    def index_of(self, p: int) -> int:
        """Index of prime p; raises ValueError if p is not in the table."""
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise ValueError(f"{p} is not a prime in the table")
        return i


def _prefix_pair(terms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Accumulate in 80-bit extended precision, store as float64 value + residue.
    cs = np.cumsum(terms)
    hi = cs.astype(np.float64)
    lo = (cs - hi.astype(np.longdouble)).astype(np.float64)
    return hi, lo


def build_prime_table(limit: int) -> PrimeTable:
    """Sieve primes up to ``limit`` (inclusive) and build prefix sums."""
    if limit < 2:
        raise ValueError("limit must be at least 2")
    primes = _odd_sieve(int(limit))
    pl = primes.astype(np.longdouble)
    inv_hi, inv_lo = _prefix_pair(1.0 / pl)
    log_hi, log_lo = _prefix_pair(np.log1p(-1.0 / pl))
    return PrimeTable(
        limit=int(limit),
        primes=primes,
        inv_prefix=inv_hi,
        log1m_prefix=log_hi,
        inv_resid=inv_lo,
        log1m_resid=log_lo,
    )


def _range_sum(hi: np.ndarray, lo: np.ndarray, a: int, b: int) -> float:
    """Sum of prefix terms with indices in [a, b)."""
    if a >= b:
        return 0.0
    if a == 0:
        return float(hi[b - 1] + lo[b - 1])
    return float((hi[b - 1] - hi[a - 1]) + (lo[b - 1] - lo[a - 1]))


def inv_range_sum(table: PrimeTable, a: int, b: int) -> float:
    """Sum of 1/p over prime indices in [a, b)."""
    return _range_sum(table.inv_prefix, table.inv_resid, a, b)


def log1m_range_sum(table: PrimeTable, a: int, b: int) -> float:
    """Sum of log(1 - 1/p) over prime indices in [a, b)."""
    return _range_sum(table.log1m_prefix, table.log1m_resid, a, b)


def mertens_sum(table: PrimeTable, lo: int, hi: int) -> float:
    """Sum of 1/p over primes p with lo <= p <= hi, via prefix differences."""
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    if lo < 2 or hi > table.limit:
        raise HeadroomError(f"range [{lo}, {hi}] outside table limit {table.limit}")
    a = int(np.searchsorted(table.primes, lo, side="left"))
    b = int(np.searchsorted(table.primes, hi, side="right"))
    return inv_range_sum(table, a, b)


def mertens_product(table: PrimeTable, lo: int, hi: int) -> float:
    """Product of (1 - 1/p) over primes p with lo <= p < hi."""
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi})")
    if lo < 2 or hi - 1 > table.limit:
        raise HeadroomError(f"range [{lo}, {hi}) outside table limit {table.limit}")
    a = int(np.searchsorted(table.primes, lo, side="left"))
    b = int(np.searchsorted(table.primes, hi, side="left"))
    return math.exp(log1m_range_sum(table, a, b))


def gap_bound(p: int, params: "GapParameters") -> float:
    """Log-domain right endpoint of p's gap interval.

    A prime q lies in the interval iff q > p and log q <= gap_bound(p).
    This fixed IEEE-double comparison is the membership rule used
    everywhere in the package.
    """
    return params.exp_z * math.log(p)


def in_gap_interval(p: int, q: int, params: "GapParameters") -> bool:
    """Whether prime q falls in p's gap interval under the comparison rule."""
    return q > p and math.log(q) <= gap_bound(p, params)


def primes_in_gap_interval(
    table: PrimeTable, p: int, params: "GapParameters"
) -> tuple[int, int]:
    """Index range [start, stop) of table primes inside p's gap interval."""
    i = table.index_of(p)
    t = gap_bound(p, params)
    if t > math.log(table.limit):
        raise HeadroomError(
            f"gap interval of p={p} at z={params.z} exceeds table limit {table.limit}"
        )
    start = i + 1
    stop = int(np.searchsorted(table.primes, math.exp(t), side="right"))
    # searchsorted works on values; settle ulp-level boundary cases with the rule
    while stop < len(table.primes) and math.log(int(table.primes[stop])) <= t:
        stop += 1
    while stop > start and math.log(int(table.primes[stop - 1])) > t:
        stop -= 1
    return start, max(stop, start)


def gap_interval_log_product(table: PrimeTable, p: int, params: "GapParameters") -> float:
    """log of the product of (1 - 1/q) over primes q in p's gap interval."""
    start, stop = primes_in_gap_interval(table, p, params)
    return log1m_range_sum(table, start, stop)


def save_table(table: PrimeTable, path) -> None:
    """Write the binary cache: header (magic, version, limit, count) + uint16 gaps.

    The prime list is delta-encoded (first entry is the gap from 0 to 2);
    prefix sums are derived data and rebuilt on load.
    """
    gaps = np.diff(table.primes, prepend=np.int64(0))
    if gaps.max() >= 2**16:
        raise ValueError("prime gap exceeds uint16 cache encoding")
    header = struct.pack("<4sIQQ", CACHE_MAGIC, CACHE_VERSION, table.limit, len(table.primes))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(gaps.astype(np.uint16).tobytes())


def load_table(path) -> PrimeTable:
    """Read a binary cache written by :func:`save_table` and rebuild prefixes."""
    with open(path, "rb") as fh:
        header = fh.read(24)
        if len(header) != 24:
            raise CacheFormatError("truncated cache header")
        magic, version, limit, count = struct.unpack("<4sIQQ", header)
        if magic != CACHE_MAGIC:
            raise CacheFormatError(f"bad magic {magic!r}")
        if version != CACHE_VERSION:
            raise CacheFormatError(f"unsupported cache version {version}")
        payload = fh.read()
    if len(payload) != 2 * count:
        raise CacheFormatError("cache payload length mismatch")
    gaps = np.frombuffer(payload, dtype=np.uint16).astype(np.int64)
    primes = np.cumsum(gaps)
    if count and (primes[0] != 2 or primes[-1] > limit):
        raise CacheFormatError("cache payload inconsistent with header")
    pl = primes.astype(np.longdouble)
    inv_hi, inv_lo = _prefix_pair(1.0 / pl)
    log_hi, log_lo = _prefix_pair(np.log1p(-1.0 / pl))
    return PrimeTable(
        limit=int(limit),
        primes=primes,
        inv_prefix=inv_hi,
        log1m_prefix=log_hi,
        inv_resid=inv_lo,
        log1m_resid=log_lo,
    )
