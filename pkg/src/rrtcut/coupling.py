"""Coupled tree pairs sharing all non-root attachment choices.

The attachment of vertex i decomposes into a Bernoulli(1/(i-1)) indicator
"attach to the root" and, on failure, a uniform alternative parent in
{2, ..., i-1}. Conditioning only the indicator vector on its sum landing in
a window around ln n, while reusing the same alternative parents, couples a
plain tree with a root-degree-conditioned tree so that they differ in few
places. The two indicator vectors are drawn by independent resampling (the
conditioned one by rejection); any joint law with the right marginals would
do, and this one keeps the bookkeeping simple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .trees import RecursiveTree, RngStream, as_generator

REJECTION_ATTEMPT_BUDGET = 10**6


class RejectionBudgetError(RuntimeError):
    """Conditioned sampling used up its attempt budget without accepting."""


class ConditionedDraw(NamedTuple):
    values: np.ndarray  # bool, entry j is the root-attachment indicator of vertex j+2
    attempts: int


def degree_window(n: int, epsilon: float) -> tuple[float, float]:
    """Open acceptance window ((1-eps) ln n, (1+eps) ln n) for the root degree.

    Raises ValueError if no achievable degree (an integer in [1, n-1])
    falls strictly inside.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    ln = math.log(n)
    lo, hi = (1.0 - epsilon) * ln, (1.0 + epsilon) * ln
    k_min = max(math.floor(lo) + 1, 1)
    k_max = min(math.ceil(hi) - 1, n - 1)
    if k_min > k_max:
        raise ValueError(
            f"window ({lo:.4f}, {hi:.4f}) contains no achievable root degree"
        )
    return lo, hi


def sample_conditioned_bernoulli(
    n: int,
    epsilon: float,
    rng: RngStream | np.random.Generator | int,
    max_attempts: int = REJECTION_ATTEMPT_BUDGET,
) -> ConditionedDraw:
    """Rejection-sample root-attachment indicators conditioned on their sum.

    The vector covers vertices 2..n; entry j is Bernoulli(1/(j+1)), so the
    vertex-2 entry is identically true. A draw is accepted when its sum (the
    root degree of the tree it would build) lands strictly inside
    ((1-eps) ln n, (1+eps) ln n). Returns the accepted vector and the number
    of attempts consumed.
    """
    lo, hi = degree_window(n, epsilon)
    gen = as_generator(rng)
    probs = 1.0 / np.arange(1, n)
    for attempt in range(1, max_attempts + 1):
        values = gen.random(n - 1) < probs
        s = int(values.sum())
        if lo < s < hi:
            return ConditionedDraw(values=values, attempts=attempt)
    raise RejectionBudgetError(
        f"no acceptance in {max_attempts} attempts (n={n}, epsilon={epsilon})"
    )


@dataclass(frozen=True)
class CoupledSample:
    """One coupled pair of trees on n vertices.

    ``root_attach`` / ``root_attach_cond`` are the unconditioned and
    conditioned indicator vectors; entry j belongs to vertex j+2, and the
    first entry is identically true in both. ``alt_parent[j]`` is the shared
    alternative parent of vertex j+2 (1 for vertex 2, uniform on
    {2, ..., j+1} otherwise), used by whichever tree has a false indicator
    there. Wherever the indicators agree, the two trees share the parent.
    """

    n: int
    epsilon: float
    root_attach: np.ndarray
    root_attach_cond: np.ndarray
    alt_parent: np.ndarray
    tree: RecursiveTree
    tree_cond: RecursiveTree
    root_degree: int
    root_degree_cond: int
    attempts: int


def _assemble(n: int, attach: np.ndarray, alt: np.ndarray) -> RecursiveTree:
    parent = np.zeros(n + 1, dtype=np.int64)
    parent[2:] = np.where(attach, 1, alt)
    degree = np.bincount(parent[2:], minlength=n + 1).astype(np.int64)
    parent.setflags(write=False)
    degree.setflags(write=False)
    return RecursiveTree(n=n, parent=parent, degree=degree)


def build_coupled_pair(
    n: int,
    epsilon: float,
    rng: RngStream | np.random.Generator | int,
    max_attempts: int = REJECTION_ATTEMPT_BUDGET,
) -> CoupledSample:
    """Draw one coupled (plain, conditioned) tree pair.

    Draw order on the single stream: unconditioned indicators, then the
    rejection loop for the conditioned ones, then the shared alternative
    parents (independent of both indicator vectors).
    """
    lo, hi = degree_window(n, epsilon)
    gen = as_generator(rng)
    probs = 1.0 / np.arange(1, n)
    b = gen.random(n - 1) < probs
    draw = sample_conditioned_bernoulli(n, epsilon, gen, max_attempts=max_attempts)
    alt = np.empty(n - 1, dtype=np.int64)
    alt[0] = 1
    if n > 2:
        alt[1:] = gen.integers(2, np.arange(3, n + 1))
    tree = _assemble(n, b, alt)
    tree_cond = _assemble(n, draw.values, alt)
    rd, rd_cond = tree.root_degree, tree_cond.root_degree
    if not lo < rd_cond < hi:
        raise AssertionError("conditioned root degree escaped the window")
    return CoupledSample(
        n=n,
        epsilon=epsilon,
        root_attach=b,
        root_attach_cond=draw.values,
        alt_parent=alt,
        tree=tree,
        tree_cond=tree_cond,
        root_degree=rd,
        root_degree_cond=rd_cond,
        attempts=draw.attempts,
    )


@dataclass(frozen=True)
class TailRatioDiagnostic:
    """Per-sample tail-count comparison at one degree threshold.

    ``tail_ratio`` is (1 + Z_cond) / (1 + Z), where Z counts vertices of
    degree >= d; the +1 smoothing pins it inside [1/n, n] and makes d = 0
    give exactly 1. ``sym_diff_root_children`` counts indicator positions
    where the coupled trees disagree (the symmetric difference of their root
    child sets); ``differing_degree_count`` counts non-root vertices whose
    degrees differ, which never exceeds it because each flipped indicator
    shifts exactly one alternative parent's child count.
    """

    d: int
    tail_ratio: float
    sym_diff_root_children: int
    differing_degree_count: int
    tail_count: int
    tail_count_cond: int


def coupling_diagnostics(sample: CoupledSample, d: int) -> TailRatioDiagnostic:
    if d < 0:
        raise ValueError("degree threshold must be non-negative")
    z = int(np.count_nonzero(sample.tree.degree[1:] >= d))
    z_cond = int(np.count_nonzero(sample.tree_cond.degree[1:] >= d))
    w = (1.0 + z_cond) / (1.0 + z)
    if not 1.0 / sample.n <= w <= sample.n:
        raise AssertionError("tail ratio escaped [1/n, n]")
    sym = int(np.count_nonzero(sample.root_attach != sample.root_attach_cond))
    diff_deg = int(
        np.count_nonzero(sample.tree.degree[2:] != sample.tree_cond.degree[2:])
    )
    return TailRatioDiagnostic(
        d=d,
        tail_ratio=w,
        sym_diff_root_children=sym,
        differing_degree_count=diff_deg,
        tail_count=z,
        tail_count_cond=z_cond,
    )
