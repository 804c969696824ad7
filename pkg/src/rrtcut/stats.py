"""Estimators and exact references for degree-tail statistics.

Monte Carlo estimators for falling-factorial moments of the tail counts
Z_{>=d}, their total-variation distance to a Poisson reference, and the
growth of the tail count evaluated at the root's own degree. The exact
Poisson-binomial root-degree law is computed by sequential convolution and
serves as the oracle for the concentration checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import poisson

from .coupling import degree_window
from .trees import RngStream, as_generator, sample_degree_array

# Limiting exponent of the tail count at the root's degree: ln Z / ln n
# concentrates near this value for large n.
GAMMA = 1.0 - math.log(2.0)

# Half-widths for the empirical out-of-window probabilities in gamma_trend.
TAIL_HALF_WIDTHS = (0.05, 0.10, 0.15)


def falling_factorial(r: float, a: int) -> float:
    """Product r (r-1) ... (r-a+1); equals 1 when a = 0."""
    if a < 0:
        raise ValueError("a must be non-negative")
    out = 1.0
    for j in range(a):
        out *= r - j
    return out


@dataclass(frozen=True)
class MomentEstimate:
    """Sample mean of the k-th falling-factorial moment of Z_{>=d}.

    ``theory`` is (n/2^d)^k when that reference applies (k in {1, 2} and
    d below 1.5 ln n); None otherwise, rather than extrapolating.
    """

    n: int
    d: int
    k: int
    estimate: float
    std_error: float
    theory: float | None


def estimate_tail_moments(
    n: int,
    d_values: Iterable[int],
    k_values: Iterable[int],
    replicates: int,
    rng: RngStream | np.random.Generator | int,
) -> list[MomentEstimate]:
    """Monte Carlo means of (Z_{>=d})_k over fresh trees, one draw per replicate.

    All (d, k) cells share the same replicate trees, so cells are correlated
    across the grid but each estimate is unbiased with an honest standard
    error. Needs replicates >= 2 for the variance estimate.
    """
    d_list = [int(d) for d in d_values]
    k_list = [int(k) for k in k_values]
    if replicates < 2:
        raise ValueError("replicates must be at least 2")
    if n < 1:
        raise ValueError("n must be at least 1")
    if any(d < 0 for d in d_list):
        raise ValueError("degree thresholds must be non-negative")
    if any(k < 0 for k in k_list):
        raise ValueError("moment orders must be non-negative")
    gen = as_generator(rng)
    sums = np.zeros((len(d_list), len(k_list)))
    sumsq = np.zeros_like(sums)
    deg = np.zeros(n + 1, dtype=np.int64)
    for _ in range(replicates):
        sample_degree_array(n, gen, out=deg)
        counts = np.bincount(deg[1:])
        z_ge = counts[::-1].cumsum()[::-1]
        for a, d in enumerate(d_list):
            z = int(z_ge[d]) if d < z_ge.size else 0
            for b, k in enumerate(k_list):
                v = falling_factorial(z, k)
                sums[a, b] += v
                sumsq[a, b] += v * v
    out = []
    theory_cap = 1.5 * math.log(n)
    for a, d in enumerate(d_list):
        for b, k in enumerate(k_list):
            mean = sums[a, b] / replicates
            var = max(sumsq[a, b] - replicates * mean * mean, 0.0) / (replicates - 1)
            theory = None
            if k in (1, 2) and d < theory_cap:
                theory = (n / 2.0**d) ** k
            out.append(
                MomentEstimate(
                    n=n,
                    d=d,
                    k=k,
                    estimate=float(mean),
                    std_error=float(math.sqrt(var / replicates)),
                    theory=theory,
                )
            )
    return out


def half_l1_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance between two pmfs on a shared support grid."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must share a support grid")
    return 0.5 * float(np.abs(p - q).sum())


@dataclass(frozen=True)
class TvEstimate:
    n: int
    d: int
    mu: float
    tv: float
    replicates: int


def estimate_tv_to_poisson(
    n: int,
    d: int,
    replicates: int,
    rng: RngStream | np.random.Generator | int,
) -> TvEstimate:
    """Empirical total variation between Z_{>=d} and Poisson(n/2^d).

    The Poisson mean is the deterministic reference value, not the empirical
    mean, so reruns are comparable. The support is truncated where the
    Poisson tail drops below 1e-12; the tail remainder is lumped into one
    extra cell on both sides, keeping the distance a symmetric function of
    the two vectors. Thresholds a bit above ln n are where the Poisson
    picture is sharpest; any d is accepted.
    """
    if replicates < 100:
        raise ValueError("replicates must be at least 100")
    if n < 1:
        raise ValueError("n must be at least 1")
    if d < 0:
        raise ValueError("degree threshold must be non-negative")
    gen = as_generator(rng)
    zs = np.empty(replicates, dtype=np.int64)
    deg = np.zeros(n + 1, dtype=np.int64)
    for r in range(replicates):
        sample_degree_array(n, gen, out=deg)
        zs[r] = np.count_nonzero(deg[1:] >= d)
    mu = n / 2.0**d
    k_tail = 0
    if mu > 0:
        q = poisson.isf(1e-12, mu)
        if np.isfinite(q):
            k_tail = int(q)
    kmax = max(int(zs.max()), k_tail)
    emp = np.bincount(zs, minlength=kmax + 1).astype(float) / replicates
    poi = poisson.pmf(np.arange(kmax + 1), mu)
    emp_vec = np.append(emp, 0.0)
    poi_vec = np.append(poi, poisson.sf(kmax, mu))
    return TvEstimate(
        n=n,
        d=d,
        mu=mu,
        tv=half_l1_distance(emp_vec, poi_vec),
        replicates=replicates,
    )


_TRIM_EPS = 1e-14
_DROP_BUDGET = 1e-10


def root_degree_distribution_exact(n: int) -> np.ndarray:
    """Exact pmf of the root degree, indexed so entry k-1 is P(D = k).

    The root degree is a sum of independent Bernoulli(1/(i-1)) indicators,
    one per vertex i = 2..n; sequential convolution with edge truncation
    keeps the cost O(n log n). Cells below 1e-14 at the support edges are
    dropped; the run aborts if the cumulative dropped mass ever exceeds
    1e-10, so the returned vector sums to 1 within that budget and its mean
    matches the (n-1)-th harmonic number to 1e-9.
    """
    if not 2 <= n <= 10**6:
        raise ValueError("n must be in [2, 10^6]")
    pmf = np.array([1.0])
    lo = 0  # pmf[j] = P(D = lo + j)
    dropped = 0.0
    for i in range(2, n + 1):
        p = 1.0 / (i - 1)
        nxt = np.empty(pmf.size + 1)
        np.multiply(pmf, 1.0 - p, out=nxt[:-1])
        nxt[-1] = 0.0
        nxt[1:] += pmf * p
        pmf = nxt
        if i & 63 == 0 or i == n:
            keep = pmf >= _TRIM_EPS
            first = int(np.argmax(keep))
            last = pmf.size - int(np.argmax(keep[::-1]))
            if first > 0 or last < pmf.size:
                dropped += float(pmf[:first].sum() + pmf[last:].sum())
                if dropped > _DROP_BUDGET:
                    raise RuntimeError(
                        "truncation dropped more mass than the 1e-10 budget"
                    )
                pmf = pmf[first:last].copy()
                lo += first
    out = np.zeros(n - 1)
    out[lo - 1 : lo - 1 + pmf.size] = pmf
    return out


def bernstein_window_bound(n: int, epsilon: float) -> float:
    """Concentration bound 2 n^(-eps^2/12) on the root degree leaving the
    (1 +- eps) ln n window. Loose at practical sizes, but never violated;
    the exact convolution is the sharp reference."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    return 2.0 * float(n) ** (-(epsilon * epsilon) / 12.0)


def window_miss_probability(n: int, epsilon: float) -> float:
    """Exact P(root degree outside the open (1 +- eps) ln n window)."""
    lo, hi = degree_window(n, epsilon)
    pmf = root_degree_distribution_exact(n)
    degrees = np.arange(1, n)
    inside = (degrees > lo) & (degrees < hi)
    return float(pmf[~inside].sum())


@dataclass(frozen=True)
class GammaTrendPoint:
    """Growth summary of the tail count at the root's degree, for one n.

    ``mean_ratio`` estimates E[ln Z / ln n] where Z counts vertices whose
    degree is at least the root's; ``kth_moment[k]`` estimates E[(ln Z)^k]
    with ``std_errors`` to match; ``tail_prob[delta]`` is the empirical
    probability that the ratio misses (GAMMA - delta, GAMMA + delta).
    """

    n: int
    mean_ratio: float
    mean_ratio_se: float
    kth_moment: dict[int, float]
    std_errors: dict[int, float]
    tail_prob: dict[float, float]


def gamma_trend(
    n_ladder: Sequence[int],
    replicates: int,
    k_max: int,
    rng: RngStream | np.random.Generator | int,
) -> list[GammaTrendPoint]:
    """Sample ln(Z at the root's degree) along a ladder of sizes.

    One fresh tree per replicate per rung. Z >= 1 always (the root counts
    itself), so the logarithm is well defined and the ratio sits in [0, 1).
    """
    if replicates < 100:
        raise ValueError("replicates must be at least 100")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    sizes = [int(n) for n in n_ladder]
    if not sizes:
        raise ValueError("n_ladder must be non-empty")
    if any(n < 2 for n in sizes):
        raise ValueError("ladder sizes must be at least 2")
    gen = as_generator(rng)
    points = []
    for n in sizes:
        deg = np.zeros(n + 1, dtype=np.int64)
        logs = np.empty(replicates)
        for r in range(replicates):
            sample_degree_array(n, gen, out=deg)
            z = np.count_nonzero(deg[1:] >= deg[1])
            logs[r] = math.log(z)
        ratios = logs / math.log(n)
        kth: dict[int, float] = {}
        ses: dict[int, float] = {}
        for k in range(1, k_max + 1):
            vals = logs**k
            kth[k] = float(vals.mean())
            ses[k] = float(vals.std(ddof=1) / math.sqrt(replicates))
        tails = {
            delta: float(np.mean(np.abs(ratios - GAMMA) >= delta))
            for delta in TAIL_HALF_WIDTHS
        }
        points.append(
            GammaTrendPoint(
                n=n,
                mean_ratio=float(ratios.mean()),
                mean_ratio_se=float(ratios.std(ddof=1) / math.sqrt(replicates)),
                kth_moment=kth,
                std_errors=ses,
                tail_prob=tails,
            )
        )
    return points
