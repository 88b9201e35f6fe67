"""Numba-compiled inner loops (segment factorization, large outcome spaces).

Kernels are deterministic: no fastmath, fixed iteration order, and all
floating-point comparisons use the same log-domain rule as the pure
Python code paths.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def segment_histogram_kernel(lo, hi, small_primes, small_logs, exp_z, cutoff, cap, hist):
    """Histogram of truncated delta-sum values over m in [lo, hi).

    Each m's distinct prime divisors are found by marking multiples of the
    primes <= sqrt(hi - 1) and appending the leftover cofactor (> 1 means a
    single prime above the sieving bound).  Returns 0 on success, -1 if some
    m has more than ``cap`` distinct prime divisors.
    """
    size = hi - lo
    cnt = np.zeros(size, dtype=np.uint8)
    vals = np.zeros((size, cap + 1), dtype=np.int64)
    logs = np.zeros((size, cap + 1), dtype=np.float64)
    rem = np.empty(size, dtype=np.int64)
    for j in range(size):
        rem[j] = lo + j
    seg_last = hi - 1
    for i in range(small_primes.shape[0]):
        p = small_primes[i]
        if p * p > seg_last:
            break
        lp = small_logs[i]
        first = ((lo + p - 1) // p) * p
        for mm in range(first, hi, p):
            j = mm - lo
            k = cnt[j]
            if k >= cap:
                return -1
            vals[j, k] = p
            logs[j, k] = lp
            cnt[j] = k + 1
            v = rem[j] // p
            while v % p == 0:
                v //= p
            rem[j] = v
    for j in range(size):
        k = cnt[j]
        if rem[j] > 1:
            if k >= cap:
                return -1
            vals[j, k] = rem[j]
            logs[j, k] = math.log(rem[j])
            k += 1
        d = 0
        for i in range(k - 1):
            if vals[j, i] <= cutoff and logs[j, i + 1] > exp_z * logs[j, i]:
                d += 1
        if k > 0 and vals[j, k - 1] <= cutoff:
            d += 1
        hist[d] += 1
    return 0


@njit(cache=True, nogil=True)
def enumerate_pmf_kernel(qprob, is_model, next_bound, pmf, comp):
    """Accumulate the distribution of the indicator sum over all 2^K outcomes.

    ``qprob[i]`` is the success probability of the i-th prime, ``is_model[i]``
    marks primes that contribute to the sum, and ``next_bound[i]`` is the
    exclusive index bound of the i-th prime's gap interval.  Probabilities go
    into ``pmf`` with Kahan compensation ``comp``.
    """
    K = qprob.shape[0]
    for mask in range(1 << K):
        prob = 1.0
        s = 0
        prev = -1
        for i in range(K):
            if (mask >> i) & 1:
                prob *= qprob[i]
                if prev >= 0 and is_model[prev] and i >= next_bound[prev]:
                    s += 1
                prev = i
            else:
                prob *= 1.0 - qprob[i]
        if prev >= 0 and is_model[prev]:
            s += 1
        y = prob - comp[s]
        t = pmf[s] + y
        comp[s] = (t - pmf[s]) - y
        pmf[s] = t
