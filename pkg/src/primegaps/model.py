"""Dependent-indicator model of gap counts over primes.

For each prime p the model multiplies an independent Bernoulli(1/p)
success by the requirement that no success lands in p's gap interval.
The module computes the model's exact mean/variance from finite
identities, samples the indicator sum, enumerates small outcome spaces
exactly (the brute-force oracle), and evaluates the three error
functionals of the normal-approximation bound together with the exact
CDF of the sum.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import primes as primes_mod
from ._kernels import enumerate_pmf_kernel
from .errors import EnumerationCapError, HeadroomError
from .gap_counter import GapParameters, MomentAccumulator
from .primes import PrimeTable
from .stats import normal_cdf

ENUMERATION_CAP = 24     # hard cap on full 2^K outcome enumeration
RATIONAL_CAP = 16        # exact rational arithmetic up to here, floats beyond
JOINT_MODEL_CAP = 16     # joint-law computation: number of tracked indicators
JOINT_ENV_CAP = 512      # joint-law computation: number of environment primes


@dataclass(frozen=True)
class ModelPrediction:
    """Exact finite-N model quantities plus the limiting mean/variance lines."""

    N: int
    z: float
    c_N: float
    s2_N: float
    asym_mean: float
    asym_var: float
    prime_list: np.ndarray = field(repr=False)
    h_values: np.ndarray = field(repr=False)

    @property
    def h(self) -> dict[int, float]:
        """Per-prime expectation of the dependent indicator."""
        return dict(zip(self.prime_list.tolist(), self.h_values.tolist()))


def model_h(p: int, params: GapParameters, table: PrimeTable) -> float:
    """E of the dependent indicator at p: (1/p) * prod(1 - 1/q) over p's interval."""
    return math.exp(primes_mod.gap_interval_log_product(table, p, params)) / p


def _interval_stops(table: PrimeTable, K: int, params: GapParameters) -> np.ndarray:
    """Exclusive index bound of each prime's gap interval, for primes[:K]."""
    ps = table.primes
    ts = np.array([params.exp_z * math.log(int(ps[i])) for i in range(K)])
    cand = np.searchsorted(ps, np.exp(ts), side="right")
    plen = len(ps)
    stops = np.empty(K, dtype=np.int64)
    for i in range(K):
        s = int(cand[i])
        t = ts[i]
        while s < plen and math.log(int(ps[s])) <= t:
            s += 1
        while s > i + 1 and math.log(int(ps[s - 1])) > t:
            s -= 1
        stops[i] = max(s, i + 1)
    return stops


def model_mean_and_variance(
    N: int, params: GapParameters, table: PrimeTable
) -> ModelPrediction:
    """Exact c_N and s2_N from the finite identities (no asymptotics).

    The variance is sum h_p(1-h_p) minus twice the sum of h_p*h_q over
    linked pairs p < q <= min(N, p's interval end); linked pairs have
    vanishing joint expectation, everything farther apart is independent.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    t_N = params.exp_z * math.log(N)
    if t_N > math.log(table.limit):
        raise HeadroomError(
            f"model at N={N}, z={params.z} needs primes beyond limit {table.limit}"
        )
    K = table.count_leq(N)
    stops = _interval_stops(table, K, params)
    hi, lo = table.log1m_prefix, table.log1m_resid
    a = np.arange(1, K + 1)
    b = stops
    log_prod = np.where(
        b > a, (hi[b - 1] - hi[a - 1]) + (lo[b - 1] - lo[a - 1]), 0.0
    )
    h = np.exp(log_prod) / table.primes[:K]
    c_N = math.fsum(h.tolist())
    hl = h.astype(np.longdouble)
    cum = np.concatenate((np.zeros(1, dtype=np.longdouble), np.cumsum(hl)))
    ub = np.minimum(stops, K)
    linked_h = cum[ub] - cum[a]
    pair_total = float(np.sum(hl * linked_h))
    diag = math.fsum((h * (1.0 - h)).tolist())
    s2 = diag - 2.0 * pair_total
    lnln = math.log(math.log(N))
    emz = math.exp(-params.z)
    return ModelPrediction(
        N=N,
        z=params.z,
        c_N=c_N,
        s2_N=s2,
        asym_mean=emz * lnln,
        asym_var=(1.0 - 2.0 * params.z * emz) * emz * lnln,
        prime_list=table.primes[:K].copy(),
        h_values=h,
    )


# ---------------------------------------------------------------------------
# exact joint law of the indicators for a small prime selection
# ---------------------------------------------------------------------------

def _environment_primes(model_primes: Sequence[int], params: GapParameters) -> list[int]:
    """All primes that any selected indicator can read: up to the largest interval end."""
    p_max = model_primes[-1]
    t_max = params.exp_z * math.log(p_max)
    bound = int(math.floor(math.exp(t_max))) + 2
    qs = primes_mod.simple_sieve(bound)
    return [int(q) for q in qs if q <= p_max or math.log(int(q)) <= t_max]


def joint_b_distribution(
    model_primes: Sequence[int], params: GapParameters
) -> tuple[dict[int, Fraction], list[Fraction]]:
    """Exact joint law of the dependent indicators at ``model_primes``.

    Returns (law, h) where law maps a bitmask (bit k = indicator of the k-th
    selected prime) to its exact probability, and h[k] is the exact marginal
    expectation.  Works by scanning environment primes downward and tracking
    the index of the nearest success above the scan point; 2^K outcome
    enumeration is never needed, only O(env * states) transfer steps.
    """
    sel = sorted(int(p) for p in model_primes)
    if len(sel) != len(set(sel)):
        raise ValueError("selected primes must be distinct")
    if len(sel) > JOINT_MODEL_CAP:
        raise EnumerationCapError(f"joint law capped at {JOINT_MODEL_CAP} indicators")
    env = _environment_primes(sel, params)
    if len(env) > JOINT_ENV_CAP:
        raise EnumerationCapError(f"environment of {len(env)} primes exceeds cap {JOINT_ENV_CAP}")
    env_index = {q: i for i, q in enumerate(env)}
    model_pos = {env_index[p]: k for k, p in enumerate(sel)}
    env_logs = [math.log(q) for q in env]
    bound_idx = []
    for p in sel:
        t = params.exp_z * math.log(p)
        j = env_index[p] + 1
        while j < len(env) and env_logs[j] <= t:
            j += 1
        bound_idx.append(j)

    states: dict[tuple[int, int], Fraction] = {(-1, 0): Fraction(1)}
    for i in range(len(env) - 1, -1, -1):
        q = env[i]
        hit = Fraction(1, q)
        miss = Fraction(q - 1, q)
        k = model_pos.get(i)
        new: dict[tuple[int, int], Fraction] = {}
        for (ptr, bits), pr in states.items():
            key = (ptr, bits)
            if key in new:
                new[key] += pr * miss
            else:
                new[key] = pr * miss
            b = bits
            if k is not None and not (0 <= ptr < bound_idx[k]):
                b = bits | (1 << k)
            key = (i, b)
            if key in new:
                new[key] += pr * hit
            else:
                new[key] = pr * hit
        states = new

    law: dict[int, Fraction] = {}
    for (_, bits), pr in states.items():
        law[bits] = law.get(bits, Fraction(0)) + pr
    h = [
        sum((pr for bits, pr in law.items() if bits >> k & 1), Fraction(0))
        for k in range(len(sel))
    ]
    return law, h


def indicator_product_expectation(primes_sel: Sequence[int], params: GapParameters) -> Fraction:
    """Exact E of the product of the indicators at ``primes_sel``."""
    law, _ = joint_b_distribution(primes_sel, params)
    full = (1 << len(set(primes_sel))) - 1
    return sum((pr for bits, pr in law.items() if bits == full), Fraction(0))


def central_abs_moment(
    primes_sel: Sequence[int], exponents: Sequence[int], params: GapParameters
) -> Fraction:
    """Exact E of prod |B_p - h_p|^{r_p} over the selected primes."""
    if len(exponents) != len(primes_sel):
        raise ValueError("one exponent per prime")
    law, h = joint_b_distribution(primes_sel, params)
    total = Fraction(0)
    for bits, pr in law.items():
        term = pr
        for k, r in enumerate(exponents):
            term *= abs(Fraction(bits >> k & 1) - h[k]) ** r
        total += term
    return total


# ---------------------------------------------------------------------------
# brute-force outcome enumeration (the oracle)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OutcomeEnumeration:
    """Distribution of the indicator sum from full 2^K outcome enumeration."""

    prime_set: tuple[int, ...]
    model_cutoff: int
    params: GapParameters
    pmf: Mapping[int, Fraction] | Mapping[int, float]
    exact: bool

    def outcome_probability(self, mask: int) -> Fraction:
        """Exact probability of one outcome of the underlying coin family."""
        pr = Fraction(1)
        for i, q in enumerate(self.prime_set):
            pr *= Fraction(1, q) if (mask >> i) & 1 else Fraction(q - 1, q)
        return pr

    def mean(self):
        return sum(v * p for v, p in self.pmf.items())

    def central_moment(self, r: int):
        mu = self.mean()
        return sum((v - mu) ** r * p for v, p in self.pmf.items())


def minimal_enumeration_bound(N: int, params: GapParameters) -> int:
    """Smallest M whose prime set covers every coin the sum at cutoff N reads."""
    env = _environment_primes(primes_mod.simple_sieve(N).tolist(), params)
    return env[-1]


def enumerate_outcomes(M: int, N: int, params: GapParameters) -> OutcomeEnumeration:
    """Enumerate all outcomes of the coins at primes <= M; sum cutoff at N.

    Exact rational probabilities up to 16 primes, Kahan-compensated floats
    up to the hard cap of 24.
    """
    if N < 2 or M < N:
        raise ValueError("need 2 <= N <= M")
    qs = [int(q) for q in primes_mod.simple_sieve(M)]
    K = len(qs)
    if K > ENUMERATION_CAP:
        raise EnumerationCapError(f"{K} primes exceed the {ENUMERATION_CAP}-coin enumeration cap")
    needed = minimal_enumeration_bound(N, params)
    if needed > M:
        raise ValueError(
            f"M={M} does not cover the coins up to {needed} read by the sum at N={N}"
        )
    logs = [math.log(q) for q in qs]
    is_model = [q <= N for q in qs]
    next_bound = [0] * K
    for i, q in enumerate(qs):
        if is_model[i]:
            t = params.exp_z * logs[i]
            j = i + 1
            while j < K and logs[j] <= t:
                j += 1
            next_bound[i] = j

    if K <= RATIONAL_CAP:
        pmf_r: dict[int, Fraction] = {}
        hit = [Fraction(1, q) for q in qs]
        miss = [Fraction(q - 1, q) for q in qs]

        def walk(i: int, prob: Fraction, prev: int, s: int) -> None:
            if i == K:
                if prev >= 0 and is_model[prev]:
                    s += 1
                pmf_r[s] = pmf_r.get(s, Fraction(0)) + prob
                return
            walk(i + 1, prob * miss[i], prev, s)
            s1 = s
            if prev >= 0 and is_model[prev] and i >= next_bound[prev]:
                s1 += 1
            walk(i + 1, prob * hit[i], i, s1)

        walk(0, Fraction(1), -1, 0)
        return OutcomeEnumeration(tuple(qs), N, params, pmf_r, exact=True)

    qprob = np.array([1.0 / q for q in qs])
    pmf_arr = np.zeros(K + 2)
    comp = np.zeros(K + 2)
    enumerate_pmf_kernel(
        qprob,
        np.array(is_model, dtype=np.bool_),
        np.array(next_bound, dtype=np.int64),
        pmf_arr,
        comp,
    )
    pmf_f = {v: float(pmf_arr[v]) for v in range(K + 2) if pmf_arr[v] != 0.0}
    return OutcomeEnumeration(tuple(qs), N, params, pmf_f, exact=False)


def exact_moments_by_enumeration(
    M: int, N: int, params: GapParameters, r_max: int
) -> list:
    """Central moments E[(S - ES)^r] for r = 0..r_max by brute enumeration.

    Entries are Fractions when the outcome space is small enough for
    rational arithmetic, floats otherwise.
    """
    enum = enumerate_outcomes(M, N, params)
    return [enum.central_moment(r) for r in range(r_max + 1)]


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _rule_stop(table: PrimeTable, t: float) -> int:
    """First prime index whose log exceeds t."""
    stop = int(np.searchsorted(table.primes, math.exp(t), side="right"))
    while stop < len(table.primes) and math.log(int(table.primes[stop])) <= t:
        stop += 1
    while stop > 0 and math.log(int(table.primes[stop - 1])) > t:
        stop -= 1
    return stop


def _sampling_window(
    N: int, params: GapParameters, table: PrimeTable
) -> tuple[int, int]:
    t_N = params.exp_z * math.log(N)
    if t_N > math.log(table.limit):
        raise HeadroomError(
            f"sampling at N={N}, z={params.z} needs primes beyond limit {table.limit}"
        )
    return _rule_stop(table, t_N), table.count_leq(N)


def sample_S_N(N: int, params: GapParameters, table: PrimeTable, rng) -> int:
    """One draw of the indicator sum.

    Success positions are drawn directly by inverting the no-success
    probability of prime ranges on the log1m prefix sums, so a draw costs
    O(successes * log pi(limit)) instead of one coin per prime; the law of
    the success set is the same as flipping every coin.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    stop, stop_model = _sampling_window(N, params, table)
    pref = table.log1m_prefix
    rev = pref[:stop][::-1]
    cur = 0.0
    prev = -1
    s = 0
    while True:
        u = 1.0 - rng.random()  # in (0, 1]
        target = cur + math.log(u)
        nxt = stop - int(np.searchsorted(rev, target, side="left"))
        if nxt >= stop:
            if 0 <= prev < stop_model:
                s += 1
            return s
        if 0 <= prev < stop_model:
            if math.log(int(table.primes[nxt])) > params.exp_z * math.log(
                int(table.primes[prev])
            ):
                s += 1
        prev = nxt
        cur = pref[nxt]


@dataclass(frozen=True)
class MonteCarloResult:
    """Histogram of sampled sums plus the derived moment accumulator."""

    N: int
    z: float
    seed: int
    trials: int
    histogram: np.ndarray
    accumulator: MomentAccumulator


MC_BLOCK_SIZE = 4096
_MC_MAX_ROUNDS = 10_000


def monte_carlo(
    N: int,
    params: GapParameters,
    table: PrimeTable,
    seed: int,
    trials: int,
    r_max: int = 2,
    shift: float = 0.0,
    threads: int = 1,
    block_size: int = MC_BLOCK_SIZE,
) -> MonteCarloResult:
    """Seeded Monte Carlo of the indicator sum, reproducible for any thread count.

    Trials are partitioned into fixed-size blocks; block b draws from the
    b-th spawned child of SeedSequence(seed) and all lanes of a block are
    advanced together (vectorized skip sampling).  Per-block histograms are
    exact integer counts, so the merged result does not depend on how blocks
    are scheduled across workers.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    stop, stop_model = _sampling_window(N, params, table)
    pref = table.log1m_prefix
    rev = pref[:stop][::-1]
    plog = np.log(table.primes[:stop].astype(np.float64))
    n_blocks = (trials + block_size - 1) // block_size
    children = np.random.SeedSequence(seed).spawn(n_blocks)

    def run_block(b: int) -> np.ndarray:
        size = min(block_size, trials - b * block_size)
        gen = np.random.Generator(np.random.PCG64(children[b]))
        cur = np.zeros(size)
        prev = np.full(size, -1, dtype=np.int64)
        s = np.zeros(size, dtype=np.int64)
        active = np.ones(size, dtype=bool)
        rounds = 0
        while active.any():
            rounds += 1
            if rounds > _MC_MAX_ROUNDS:
                raise RuntimeError("sampling did not terminate")
            u = gen.random(size)
            target = cur + np.log1p(-u)
            nxt = stop - np.searchsorted(rev, target, side="left")
            fin = active & (nxt >= stop)
            cont = active & ~fin
            model_pend = (prev >= 0) & (prev < stop_model)
            s[fin & model_pend] += 1
            idx = np.flatnonzero(cont & model_pend)
            if idx.size:
                ok = plog[nxt[idx]] > params.exp_z * plog[prev[idx]]
                s[idx] += ok.astype(np.int64)
            prev[cont] = nxt[cont]
            cur[cont] = pref[nxt[cont]]
            active = cont
        return np.bincount(s)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_block, range(n_blocks)))
    else:
        parts = [run_block(b) for b in range(n_blocks)]
    width = max(p.size for p in parts)
    hist = np.zeros(width, dtype=np.int64)
    for p in parts:
        hist[: p.size] += p
    acc = MomentAccumulator.from_histogram(np.arange(width), hist, shift=shift, r_max=r_max)
    return MonteCarloResult(
        N=N, z=params.z, seed=seed, trials=trials, histogram=hist, accumulator=acc
    )


# ---------------------------------------------------------------------------
# normal-approximation diagnostics
# ---------------------------------------------------------------------------

def _default_grid() -> list[float]:
    return [i / 10.0 for i in range(-30, 31)]


@dataclass(frozen=True)
class SteinReport:
    """Error functionals, exact CDF deviation, and the certified bound."""

    N: int
    z: float
    psi1: float
    psi2: float
    psi3: float
    max_cdf_deviation: float
    bound: float
    holds_everywhere: bool
    normalization: Fraction
    c_N: Fraction
    s2_N: Fraction
    pmf: dict[int, Fraction]


def stein_diagnostics(
    N: int, params: GapParameters, grid: Sequence[float] | None = None
) -> SteinReport:
    """Exact second/third error functionals and CDF deviation at cutoff N.

    The first functional vanishes identically: conditioned on the coins
    outside its neighborhood, each centered indicator still has mean zero
    by independence.  Everything else is evaluated from the exact joint
    law of the indicators, with division by powers of s_N as the only
    floating-point step.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    sel = [int(p) for p in primes_mod.simple_sieve(N)]
    law, h = joint_b_distribution(sel, params)
    K = len(sel)
    logs = [math.log(p) for p in sel]

    neighbors: list[list[int]] = []
    for t in range(K):
        row = []
        for s in range(K):
            if s == t:
                row.append(s)
            elif s > t and logs[s] <= params.exp_z * logs[t]:
                row.append(s)
            elif s < t and logs[t] <= params.exp_z * logs[s]:
                row.append(s)
        neighbors.append(row)

    ebb = [[Fraction(0)] * K for _ in range(K)]
    for bits, pr in law.items():
        for t in range(K):
            if bits >> t & 1:
                for s in range(K):
                    if bits >> s & 1:
                        ebb[t][s] += pr
    cov = [[ebb[t][s] - h[t] * h[s] for s in range(K)] for t in range(K)]

    c_exact = sum(h, Fraction(0))
    s2_exact = sum(cov[t][s] for t in range(K) for s in range(K))
    if s2_exact <= 0:
        raise ValueError("variance must be positive (need N >= 3)")
    norm_exact = (
        sum(cov[t][s] for t in range(K) for s in neighbors[t]) / s2_exact
    )

    psi2_sq_num = Fraction(0)
    psi3_sq_num = Fraction(0)
    for bits, pr in law.items():
        y = [Fraction(bits >> k & 1) - h[k] for k in range(K)]
        acc2 = Fraction(0)
        acc3 = Fraction(0)
        for t in range(K):
            inner = sum((y[s] for s in neighbors[t]), Fraction(0))
            acc2 += abs(y[t]) * inner * inner
            acc3 += sum((y[t] * y[s] - cov[t][s] for s in neighbors[t]), Fraction(0))
        psi2_sq_num += pr * acc2
        psi3_sq_num += pr * acc3 * acc3

    s_float = math.sqrt(float(s2_exact))
    psi1 = 0.0
    psi2 = math.sqrt(float(psi2_sq_num) / s_float**3)
    psi3 = math.sqrt(float(psi3_sq_num / (s2_exact * s2_exact)))
    bound = 4.0 * (psi1 + psi2 + psi3)

    pmf: dict[int, Fraction] = {}
    for bits, pr in law.items():
        v = bits.bit_count()
        pmf[v] = pmf.get(v, Fraction(0)) + pr

    c_float = float(c_exact)
    values = sorted(pmf)
    cum: list[tuple[int, Fraction]] = []
    run = Fraction(0)
    for v in values:
        run += pmf[v]
        cum.append((v, run))
    max_dev = 0.0
    holds = True
    for b in grid if grid is not None else _default_grid():
        threshold = c_float + b * s_float
        prob = Fraction(0)
        for v, run in cum:
            if v <= threshold:
                prob = run
            else:
                break
        dev = abs(float(prob) - normal_cdf(b))
        max_dev = max(max_dev, dev)
        if dev > bound:
            holds = False
    return SteinReport(
        N=N,
        z=params.z,
        psi1=psi1,
        psi2=psi2,
        psi3=psi3,
        max_cdf_deviation=max_dev,
        bound=bound,
        holds_everywhere=holds,
        normalization=norm_exact,
        c_N=c_exact,
        s2_N=s2_exact,
        pmf=pmf,
    )
