"""Gap-counting statistics of prime divisors over integer ranges.

Two equivalent-up-to-a-constant counters are exposed: the per-divisor
indicator sum (``delta_sum_of``) and the consecutive-gap count
(``intro_gap_count``).  ``segmented_sweep`` evaluates the indicator sum
for every m in [1, n] with a segmented sieve and streams centered power
sums.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import primes as primes_mod
from ._kernels import segment_histogram_kernel
from .errors import DivisorCapacityError

DIVISOR_CAPACITY = 15  # enough for any m < 6e17
DEFAULT_SEGMENT_SIZE = 1 << 16


@dataclass(frozen=True)
class GapParameters:
    """Gap threshold z (on the log-log scale) with cached e^z."""

    z: float
    exp_z: float | None = None

    def __post_init__(self):
        z = float(self.z)
        if not (math.isfinite(z) and z >= 0.0):
            raise ValueError(f"z must be finite and >= 0, got {self.z}")
        object.__setattr__(self, "z", z)
        ez = math.exp(z)
        if self.exp_z is None:
            object.__setattr__(self, "exp_z", ez)
        elif abs(self.exp_z - ez) > math.ulp(ez):
            raise ValueError(f"exp_z={self.exp_z} is not exp(z) for z={z}")


@dataclass(frozen=True)
class DivisorList:
    """An integer m together with its distinct prime divisors, ascending."""

    m: int
    prime_divisors: tuple[int, ...]

    @classmethod
    def of(cls, m: int) -> "DivisorList":
        return cls(m=m, prime_divisors=tuple(primes_mod.distinct_prime_divisors(m)))

    def validate(self) -> None:
        prod = 1
        prev = 1
        for p in self.prime_divisors:
            if p <= prev:
                raise ValueError("prime divisors must be strictly increasing")
            if self.m % p:
                raise ValueError(f"{p} does not divide {self.m}")
            prod *= p
            prev = p
        if prod and self.m % prod:
            raise ValueError("product of listed primes must divide m")


def delta_sum_of(divs: DivisorList, params: GapParameters, cutoff: float = math.inf) -> int:
    """Count divisors p <= cutoff of m whose gap interval is free of divisors of m.

    Only m's own divisors can land in an interval (p, p^{e^z}], and only the
    next-larger divisor can be the smallest one there, so a single forward
    comparison per divisor decides each indicator.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2 (use math.inf for no truncation)")
    ds = divs.prime_divisors
    total = 0
    last = len(ds) - 1
    for i, p in enumerate(ds):
        if p > cutoff:
            break
        if i == last or math.log(ds[i + 1]) > params.exp_z * math.log(p):
            total += 1
    return total


def intro_gap_count(divs: DivisorList, params: GapParameters) -> int:
    """Count consecutive divisor pairs whose log-log gap strictly exceeds z.

    log log q - log log p > z is decided as log q > e^z * log p, the same
    rule as interval membership (the two are equivalent over the reals).
    """
    ds = divs.prime_divisors
    count = 0
    for i in range(len(ds) - 1):
        if math.log(ds[i + 1]) > params.exp_z * math.log(ds[i]):
            count += 1
    return count


@dataclass
class MomentAccumulator:
    """Streaming power sums of (x - shift)^r for r <= r_max, mergeable.

    ``power_sums[0]`` mirrors ``count``.  Additions and merges use Kahan
    compensation so that merge results are independent of grouping to
    well below 1e-9 relative.
    """

    shift: float
    r_max: int
    count: int = 0
    power_sums: list[float] = field(default_factory=list)
    _comp: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.r_max < 0:
            raise ValueError("r_max must be >= 0")
        if not self.power_sums:
            self.power_sums = [0.0] * (self.r_max + 1)
        if len(self.power_sums) != self.r_max + 1:
            raise ValueError("power_sums length must be r_max + 1")
        if not self._comp:
            self._comp = [0.0] * (self.r_max + 1)

    def _accumulate(self, r: int, value: float) -> None:
        y = value - self._comp[r]
        t = self.power_sums[r] + y
        self._comp[r] = (t - self.power_sums[r]) - y
        self.power_sums[r] = t

    def add(self, x: float) -> None:
        d = x - self.shift
        term = 1.0
        self._accumulate(0, 1.0)
        for r in range(1, self.r_max + 1):
            term *= d
            self._accumulate(r, term)
        self.count += 1

    def merge(self, other: "MomentAccumulator") -> None:
        if other.shift != self.shift or other.r_max != self.r_max:
            raise ValueError("can only merge accumulators with equal shift and r_max")
        for r in range(self.r_max + 1):
            self._accumulate(r, other.power_sums[r])
            self._accumulate(r, -other._comp[r])
        self.count += other.count

    @classmethod
    def from_histogram(cls, values, counts, shift: float, r_max: int) -> "MomentAccumulator":
        """Exact-count construction from a value -> count histogram."""
        acc = cls(shift=float(shift), r_max=int(r_max))
        sums = []
        for r in range(r_max + 1):
            sums.append(math.fsum(int(c) * (float(v) - shift) ** r
                                  for v, c in zip(values, counts) if c))
        total = sum(int(c) for c in counts)
        acc.count = total
        acc.power_sums = sums
        acc.power_sums[0] = float(total)
        acc._comp = [0.0] * (r_max + 1)
        return acc

    def centered_moment(self, r: int) -> float:
        """Average of (x - shift)^r."""
        if self.count == 0:
            raise ValueError("empty accumulator")
        return self.power_sums[r] / self.count


def _effective_cutoff(cutoff, n: int) -> int:
    if cutoff is None or (isinstance(cutoff, float) and math.isinf(cutoff)):
        return n
    c = int(cutoff)
    if c < 2:
        raise ValueError("cutoff must be >= 2")
    return min(c, n)


def sweep_histogram(
    n: int,
    params: GapParameters,
    cutoff: float = math.inf,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    threads: int = 1,
    _capacity: int = DIVISOR_CAPACITY,
) -> np.ndarray:
    """Histogram of delta-sum values over m in [1, n] (index = value)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if segment_size < 2:
        raise ValueError("segment_size must be >= 2")
    eff_cutoff = _effective_cutoff(cutoff, n)
    small = primes_mod.simple_sieve(math.isqrt(n))
    small_logs = np.array([math.log(int(p)) for p in small], dtype=np.float64)
    bounds = list(range(1, n + 1, segment_size))
    segments = [(lo, min(lo + segment_size, n + 1)) for lo in bounds]

    def run_segment(seg):
        lo, hi = seg
        hist = np.zeros(_capacity + 2, dtype=np.int64)
        rc = segment_histogram_kernel(
            lo, hi, small, small_logs, params.exp_z, eff_cutoff, _capacity, hist
        )
        return rc, hist

    total = np.zeros(_capacity + 2, dtype=np.int64)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_segment, segments))
    else:
        results = [run_segment(s) for s in segments]
    for rc, hist in results:
        if rc != 0:
            raise DivisorCapacityError(
                f"an integer exceeded the {_capacity}-divisor capacity"
            )
        total += hist
    return total


def segmented_sweep(
    n: int,
    params: GapParameters,
    cutoff: float = math.inf,
    r_max: int = 4,
    shift: float = 0.0,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    threads: int = 1,
) -> MomentAccumulator:
    """Accumulate (delta_sum(m) - shift)^r over all m in [1, n].

    The per-value histogram is exact integer data merged across segments,
    so the result is independent of segment size and thread count.
    """
    hist = sweep_histogram(n, params, cutoff, segment_size, threads)
    return MomentAccumulator.from_histogram(
        np.arange(hist.size), hist, shift=shift, r_max=r_max
    )
