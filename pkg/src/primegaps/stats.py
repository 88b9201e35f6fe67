"""Moment normalization, Gaussian references, and distribution distances."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .gap_counter import MomentAccumulator


def gaussian_moment(r: int) -> int:
    """r-th moment of the standard normal: 0 for odd r, (r-1)!! for even r."""
    if r < 0:
        raise ValueError("r must be >= 0")
    if r % 2:
        return 0
    out = 1
    for k in range(r - 1, 0, -2):
        out *= k
    return out


def recenter(acc: MomentAccumulator, new_shift: float) -> MomentAccumulator:
    """Re-express power sums about a new center via the binomial theorem."""
    d = acc.shift - new_shift
    sums = acc.power_sums
    new_sums = [
        math.fsum(math.comb(r, j) * sums[j] * d ** (r - j) for j in range(r + 1))
        for r in range(acc.r_max + 1)
    ]
    out = MomentAccumulator(shift=float(new_shift), r_max=acc.r_max)
    out.count = acc.count
    out.power_sums = new_sums
    out.power_sums[0] = sums[0]
    return out


def normal_cdf(b: float) -> float:
    """Standard normal CDF via erfc; exact 1/2 at zero."""
    return 0.5 * math.erfc(-b / math.sqrt(2.0))


def _distribution_items(distribution) -> list[tuple[float, float]]:
    if isinstance(distribution, Mapping):
        items = [(float(v), float(c)) for v, c in distribution.items() if c]
    elif isinstance(distribution, np.ndarray):
        items = [(float(v), float(c)) for v, c in enumerate(distribution) if c]
    else:
        items = [(float(v), float(c)) for v, c in distribution if c]
    items.sort()
    return items


def ks_distance(distribution, mean: float, sd: float) -> float:
    """Sup distance between an integer-valued empirical CDF and N(mean, sd^2).

    ``distribution`` is a value -> count mapping (or an array of counts
    indexed by value).  Both one-sided gaps at every jump point are
    examined, which is where the sup of |step - continuous| lives.
    """
    if sd <= 0:
        raise ValueError("sd must be positive")
    items = _distribution_items(distribution)
    if not items:
        raise ValueError("empty distribution")
    total = math.fsum(c for _, c in items)
    sup = 0.0
    cum = 0.0
    for v, c in items:
        ref = normal_cdf((v - mean) / sd)
        sup = max(sup, abs(cum / total - ref))
        cum += c
        sup = max(sup, abs(cum / total - ref))
    return sup


@dataclass(frozen=True)
class NormalizedMomentReport:
    """One row of a normalized-moment comparison against the Gaussian reference."""

    n: int
    z: float
    r: int
    raw_centered: float
    normalizer: float
    normalized: float
    reference: float

    @property
    def abs_error(self) -> float:
        return abs(self.normalized - self.reference)


def normalized_moment_report(
    acc: MomentAccumulator, n: int, z: float, normalizer: float, rs=None
) -> list[NormalizedMomentReport]:
    """Normalized centered moments of an accumulator against Gaussian moments."""
    if normalizer <= 0:
        raise ValueError("normalizer must be positive")
    if rs is None:
        rs = range(1, acc.r_max + 1)
    rows = []
    for r in rs:
        raw = acc.centered_moment(r)
        rows.append(
            NormalizedMomentReport(
                n=n,
                z=z,
                r=r,
                raw_centered=raw,
                normalizer=normalizer,
                normalized=raw / normalizer ** (r / 2.0),
                reference=float(gaussian_moment(r)),
            )
        )
    return rows


def report_csv(rows: list[NormalizedMomentReport]) -> str:
    """CSV rendering with columns (n, z, r, normalized_moment, gaussian_reference, abs_error)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n", "z", "r", "normalized_moment", "gaussian_reference", "abs_error"])
    for row in rows:
        writer.writerow(
            [row.n, row.z, row.r, repr(row.normalized), repr(row.reference), repr(row.abs_error)]
        )
    return buf.getvalue()
