"""Cutting processes on recursive trees.

Three ways to dismantle a tree, all measured by how many cuts it takes to
isolate the root:

* targeted: attack vertices in decreasing order of original degree,
* uniform edge: remove a uniform surviving edge, keep the root side,
* records: count path-maximum edge labels, which matches the uniform
  edge-cut count in distribution without simulating the dynamics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .trees import RecursiveTree, RngStream, as_generator


class CutPolicy(enum.Enum):
    TARGETED = "targeted"
    UNIFORM_EDGE = "uniform_edge"
    RECORDS = "records"


@dataclass(frozen=True)
class CutResult:
    """Outcome of one cutting run.

    ``z_at_root_degree`` is only meaningful for the targeted policy: the
    number of vertices whose original degree is at least the root's, which
    upper-bounds the cut count on every realization. ``trace`` (optional)
    lists the removed vertices in removal order.
    """

    policy: CutPolicy
    cuts: int
    z_at_root_degree: int | None = None
    trace: tuple[int, ...] | None = None


def targeted_cut(
    tree: RecursiveTree,
    rng: RngStream | np.random.Generator | int,
    keep_trace: bool = False,
) -> CutResult:
    """Cut vertices in decreasing order of original degree until the root falls.

    The attack order is fixed up front from the degrees of the intact tree,
    with uniform tie-breaking inside equal-degree blocks. Walking the order:
    reaching the root stops the process (the root is never cut); a vertex
    already disconnected from the root is skipped and not counted; any other
    vertex is removed, together with its subtree, and counted as one cut.
    """
    n = tree.n
    gen = as_generator(rng)
    z = int(np.count_nonzero(tree.degree[1:] >= tree.degree[1]))
    if n == 1:
        return CutResult(
            policy=CutPolicy.TARGETED,
            cuts=0,
            z_at_root_degree=z,
            trace=() if keep_trace else None,
        )
    # degree + U[0,1) sorts descending by degree with uniform order inside
    # each equal-degree block; integer degrees keep blocks from colliding.
    key = tree.degree[1:] + gen.random(n)
    order = np.argsort(-key)
    parent = tree.parent
    detached = np.zeros(n + 1, dtype=bool)
    path = np.empty(n, dtype=np.int64)
    cuts = 0
    trace: list[int] | None = [] if keep_trace else None
    for pos in order:
        v = int(pos) + 1
        if v == 1:
            break
        if detached[v]:
            continue
        w = v
        plen = 0
        while w != 1 and not detached[w]:
            path[plen] = w
            plen += 1
            w = parent[w]
        if w == 1:
            # Still attached: this cut detaches v and, implicitly, its subtree.
            detached[v] = True
            cuts += 1
            if trace is not None:
                trace.append(v)
        else:
            for t in range(plen):
                detached[path[t]] = True
    return CutResult(
        policy=CutPolicy.TARGETED,
        cuts=cuts,
        z_at_root_degree=z,
        trace=tuple(trace) if trace is not None else None,
    )


def uniform_edge_cut(
    tree: RecursiveTree,
    rng: RngStream | np.random.Generator | int,
    keep_trace: bool = False,
) -> CutResult:
    """Repeatedly delete a uniform edge of the root component, keep the root side.

    Runs until the root stands alone. Cost is O(n log n) in expectation: the
    lazy-deletion pool makes each round O(1) plus the upward walk, and walks
    are memoized so total walk work stays near-linear.
    """
    n = tree.n
    if n == 1:
        return CutResult(
            policy=CutPolicy.UNIFORM_EDGE,
            cuts=0,
            trace=() if keep_trace else None,
        )
    gen = as_generator(rng)
    u = gen.random(n - 1)
    trace_buf = np.empty(n - 1, dtype=np.int64)
    cuts = int(_kernels.uniform_edge_cut_core(tree.parent, u, trace_buf))
    return CutResult(
        policy=CutPolicy.UNIFORM_EDGE,
        cuts=cuts,
        trace=tuple(int(v) for v in trace_buf[:cuts]) if keep_trace else None,
    )


def record_count(
    tree: RecursiveTree, rng: RngStream | np.random.Generator | int
) -> CutResult:
    """Count record edges under iid uniform edge labels.

    An edge is a record when its label is the maximum along the path from
    itself to the root. The count has the same distribution as the uniform
    edge-cut count on the same tree shape, which gives a one-pass, O(n)
    sampler for that law. Trees with fewer than two vertices have no edges,
    hence zero records.
    """
    if tree.n < 2:
        return CutResult(policy=CutPolicy.RECORDS, cuts=0)
    gen = as_generator(rng)
    labels = gen.random(tree.n - 1)
    cuts = int(_kernels.record_count_core(tree.parent, labels))
    return CutResult(policy=CutPolicy.RECORDS, cuts=cuts)


def y_statistic(n: int, cuts: int) -> float:
    """Centered and rescaled cut count: (ln n)^2 * cuts / n - ln n - ln ln n.

    Needs n >= 3 so that ln ln n is defined and positive.
    """
    if n < 3:
        raise ValueError("y_statistic needs n >= 3")
    if cuts < 0:
        raise ValueError("cuts must be non-negative")
    ln = math.log(n)
    return ln * ln * cuts / n - ln - math.log(ln)
