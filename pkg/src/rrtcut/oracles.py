"""Exact reference values for small trees and degree tails.

Everything here is computed by a route independent of the simulation code:
exhaustive enumeration with rational arithmetic for small n, and a
per-vertex convolution for first moments at any n. The test suite freezes
these values as ground truth for the Monte Carlo estimators; the CLI
exposes them through the small-case oracle command.
"""

from __future__ import annotations

import functools
import itertools
from fractions import Fraction

import numpy as np

from .trees import RecursiveTree, enumerate_increasing_trees


def _cuts_for_order(tree: RecursiveTree, order: list[int]) -> int:
    """Replay the targeted process for one fixed attack order."""
    removed: set[int] = set()
    cuts = 0
    for v in order:
        if v == 1:
            break
        w = v
        detached = False
        while w != 1:
            if w in removed:
                detached = True
                break
            w = int(tree.parent[w])
        if detached:
            continue
        removed.add(v)
        cuts += 1
    return cuts


def _mean_cuts_over_tie_orders(tree: RecursiveTree) -> Fraction:
    """Average targeted cut count over all tie-break orders of one tree.

    Vertices placed after the root in the attack order never get processed,
    so blocks of degree strictly below the root's can be skipped wholesale.
    """
    by_degree: dict[int, list[int]] = {}
    for v in range(1, tree.n + 1):
        by_degree.setdefault(int(tree.degree[v]), []).append(v)
    root_degree = int(tree.degree[1])
    blocks = [by_degree[d] for d in sorted(by_degree, reverse=True) if d >= root_degree]
    total = Fraction(0)
    count = 0
    for parts in itertools.product(*(itertools.permutations(b) for b in blocks)):
        order = [v for part in parts for v in part]
        total += _cuts_for_order(tree, order)
        count += 1
    return total / count


@functools.lru_cache(maxsize=None)
def exact_targeted_cut_mean(n: int) -> Fraction:
    """Mean targeted cut count, averaged over trees and tie-break orders."""
    total = Fraction(0)
    count = 0
    for tree in enumerate_increasing_trees(n):
        total += _mean_cuts_over_tie_orders(tree)
        count += 1
    return total / count


def _descendants(edges: tuple[tuple[int, int], ...], top: int) -> set[int]:
    children: dict[int, list[int]] = {}
    for child, parent in edges:
        children.setdefault(parent, []).append(child)
    out = {top}
    stack = [top]
    while stack:
        v = stack.pop()
        for c in children.get(v, ()):
            out.add(c)
            stack.append(c)
    return out


@functools.lru_cache(maxsize=None)
def _uniform_cut_mean_from_edges(edges: tuple[tuple[int, int], ...]) -> Fraction:
    """Expected cuts to isolate vertex 1 under uniform live-edge removal.

    State = the root component's edge set; every pick detaches one subtree,
    so the expectation is 1 plus the mean over the (n-1) equally likely
    successor states. Memoized on the exact edge set, which recurs heavily
    across the enumeration.
    """
    if not edges:
        return Fraction(0)
    total = Fraction(0)
    for child, _parent in edges:
        dropped = _descendants(edges, child)
        rest = tuple(e for e in edges if e[0] not in dropped)
        total += 1 + _uniform_cut_mean_from_edges(rest)
    return total / len(edges)


def _edges_of(tree: RecursiveTree) -> tuple[tuple[int, int], ...]:
    return tuple((i, int(tree.parent[i])) for i in range(2, tree.n + 1))


@functools.lru_cache(maxsize=None)
def exact_uniform_cut_mean(n: int) -> Fraction:
    """Mean uniform edge-cut count over the exhaustive enumeration."""
    total = Fraction(0)
    count = 0
    for tree in enumerate_increasing_trees(n):
        total += _uniform_cut_mean_from_edges(_edges_of(tree))
        count += 1
    return total / count


@functools.lru_cache(maxsize=None)
def exact_record_mean(n: int) -> Fraction:
    """Mean record count over the enumeration.

    For one tree, an edge at depth h below the root is a record with
    probability 1/h (its label must beat the h-1 labels above it), so the
    per-tree mean is the sum of reciprocal depths. Agrees with
    exact_uniform_cut_mean exactly, which is the point.
    """
    total = Fraction(0)
    count = 0
    for tree in enumerate_increasing_trees(n):
        depth = [0] * (tree.n + 1)
        s = Fraction(0)
        for v in range(2, tree.n + 1):
            depth[v] = depth[int(tree.parent[v])] + 1
            s += Fraction(1, depth[v])
        total += s
        count += 1
    return total / count


@functools.lru_cache(maxsize=None)
def exact_root_degree_pmf(n: int) -> dict[int, Fraction]:
    """Distribution of the root's child count over the enumeration."""
    counts: dict[int, int] = {}
    total = 0
    for tree in enumerate_increasing_trees(n):
        counts[tree.root_degree] = counts.get(tree.root_degree, 0) + 1
        total += 1
    return {d: Fraction(c, total) for d, c in sorted(counts.items())}


@functools.lru_cache(maxsize=None)
def exact_tail_pmf(n: int, d: int) -> dict[int, Fraction]:
    """Distribution of the number of vertices with degree >= d."""
    if d < 0:
        raise ValueError("degree threshold must be non-negative")
    counts: dict[int, int] = {}
    total = 0
    for tree in enumerate_increasing_trees(n):
        z = int(np.count_nonzero(tree.degree[1:] >= d))
        counts[z] = counts.get(z, 0) + 1
        total += 1
    return {z: Fraction(c, total) for z, c in sorted(counts.items())}


def exact_tail_factorial_moment(n: int, d: int, k: int) -> Fraction:
    """Exact E[(Z_{>=d})_k] over the enumeration, as a rational."""
    if k < 0:
        raise ValueError("moment order must be non-negative")
    total = Fraction(0)
    for z, p in exact_tail_pmf(n, d).items():
        ff = 1
        for j in range(k):
            ff *= z - j
        total += ff * p
    return total


def exact_tail_first_moment(n: int, d: int) -> float:
    """Exact E[Z_{>=d}] for any n, by per-vertex degree convolution.

    Vertex v's degree is a sum of independent Bernoulli(1/j) indicators for
    j = v..n-1 (one per later arrival). Sweeping v downward grows one shared
    convolution, tracking only the masses at 0..d-1 plus the tail lump, so
    the cost is O(n d) with float accuracy limited only by rounding.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if d < 0:
        raise ValueError("degree threshold must be non-negative")
    if d == 0:
        return float(n)
    pmf = np.zeros(d)
    pmf[0] = 1.0
    tail = 0.0
    total = 0.0  # vertex n contributes P(0 >= d) = 0 for d >= 1
    for v in range(n - 1, 0, -1):
        p = 1.0 / v
        leak = pmf[d - 1] * p
        pmf[1:] = pmf[1:] * (1.0 - p) + pmf[:-1] * p
        pmf[0] *= 1.0 - p
        tail += leak
        total += tail
    return total
