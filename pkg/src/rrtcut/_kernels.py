"""Compiled kernels for the per-vertex inner loops.

Only the loops that resist vectorization live here: folding sequential
attachment draws into degree counts, the live-edge cutting loop, and the
path-maximum scan. All randomness enters as pre-drawn uniform arrays, so
every kernel is a pure function of its inputs and the calling code keeps
full control of generator state.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def degree_fill(u, deg):
    """Accumulate child counts of a recursive tree without materializing it.

    ``u`` holds n-1 uniforms, one per vertex 2..n. ``deg`` must be a zeroed
    int64 array of length n+1 (slot 0 unused). The arithmetic matches the
    vectorized tree builder exactly, draw for draw, so sampling degrees this
    way is stream-identical to building the tree and counting children.
    """
    n = u.shape[0] + 1
    for i in range(2, n + 1):
        p = 1 + int(u[i - 2] * (i - 1))
        if p >= i:
            # u just below 1.0 can round the product up to i-1; clamp.
            p = i - 1
        deg[p] += 1


@njit(cache=True, nogil=True)
def uniform_edge_cut_core(parent, u, trace):
    """Run the uniform edge-cutting process, returning the number of cuts.

    Each round picks an edge uniformly from the live pool. An edge is dead
    once its lower endpoint has lost contact with the root; picking a dead
    edge detaches nothing and is not a cut. Because dead edges are deleted
    lazily, each pick is still uniform over the live edges: dead entries
    are exchangeable with live ones under the pool's uniform choice, and
    conditioning the pick on landing in the live subset gives the uniform
    law on live edges.

    ``u`` holds exactly n-1 uniforms (one per round; the pool shrinks by one
    each round, so n-1 rounds always exhaust it and the root component is a
    single vertex afterwards). ``trace`` must have room for n-1 entries; the
    subtree roots of actual cuts are written to its prefix in cut order.
    """
    n = parent.shape[0] - 1
    m = n - 1
    pool = np.empty(m, np.int64)
    for j in range(m):
        pool[j] = j + 2  # edge (v, parent[v]) keyed by lower endpoint v
    detached = np.zeros(n + 1, np.uint8)
    path = np.empty(n, np.int64)
    cuts = 0
    size = m
    for k in range(m):
        j = int(u[k] * size)
        if j >= size:
            j = size - 1
        v = pool[j]
        size -= 1
        pool[j] = pool[size]
        # Walk upward until the root or a known-detached vertex.
        w = v
        plen = 0
        while w != 1 and detached[w] == 0:
            path[plen] = w
            plen += 1
            w = parent[w]
        if w == 1:
            detached[v] = 1
            trace[cuts] = v
            cuts += 1
        else:
            # Dead edge: memoize the discovered path so later walks stop early.
            for t in range(plen):
                detached[path[t]] = 1
    return cuts


@njit(cache=True, nogil=True)
def record_count_core(parent, labels):
    """Count edges whose label beats every label strictly above them.

    ``labels[i-2]`` is the label of the edge joining vertex i to its parent.
    Labels are continuous draws, so ties have probability zero and strict
    comparison is the right convention.
    """
    n = parent.shape[0] - 1
    pathmax = np.empty(n + 1)
    pathmax[1] = -1.0
    count = 0
    for i in range(2, n + 1):
        lab = labels[i - 2]
        above = pathmax[parent[i]]
        if lab > above:
            count += 1
            pathmax[i] = lab
        else:
            pathmax[i] = above
    return count
