"""Random recursive trees: construction, degrees, and exhaustive enumeration.

A recursive tree on vertices 1..n attaches each vertex i >= 2 to a parent
chosen from {1, ..., i-1}; choosing uniformly and independently gives the
uniform distribution over all (n-1)! increasing trees. Arrays here are
1-indexed: slot 0 is unused so vertex v lives at position v, and the root's
parent entry is the sentinel 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import _kernels

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Addressable random stream: (master_seed, stream_index) -> generator.

    Mixing is delegated to numpy's SeedSequence with the stream index as the
    spawn key, so distinct indices yield statistically independent streams
    and the same pair always reproduces the same sequence. Replicate r of an
    experiment draws from stream index r; nothing else touches that stream,
    which is what makes results independent of worker scheduling.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.master_seed & _MASK64,
            spawn_key=(self.stream_index,),
        )
        return np.random.default_rng(ss)


def as_generator(rng: RngStream | np.random.Generator | int) -> np.random.Generator:
    """Coerce a stream handle, bare generator, or integer master seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"expected RngStream, Generator, or int, got {type(rng).__name__}")


@dataclass(frozen=True)
class RecursiveTree:
    """Immutable recursive tree.

    Attributes
    ----------
    n : int
        Number of vertices.
    parent : ndarray of int64, length n+1
        ``parent[i]`` is the parent of vertex i for i >= 2; ``parent[1]`` is
        the sentinel 0 and slot 0 is unused.
    degree : ndarray of int64, length n+1
        ``degree[v]`` is the number of children of v (out-degree toward
        higher labels; the root's degree is its full graph degree).
    """

    n: int
    parent: np.ndarray
    degree: np.ndarray

    @classmethod
    def from_parents(cls, parent: np.ndarray) -> "RecursiveTree":
        parent = np.ascontiguousarray(parent, dtype=np.int64)
        n = parent.shape[0] - 1
        if n < 1:
            raise ValueError("need at least one vertex")
        degree = np.bincount(parent[2:], minlength=n + 1).astype(np.int64)
        parent.setflags(write=False)
        degree.setflags(write=False)
        tree = cls(n=n, parent=parent, degree=degree)
        tree.validate()
        return tree

    @property
    def root_degree(self) -> int:
        return int(self.degree[1])

    @property
    def max_degree(self) -> int:
        return int(self.degree[1:].max())

    def children_of(self, v: int) -> np.ndarray:
        if not 1 <= v <= self.n:
            raise ValueError(f"vertex {v} out of range")
        return np.nonzero(self.parent[2:] == v)[0] + 2

    def validate(self) -> None:
        """Raise ValueError if the parent/degree arrays are inconsistent."""
        if self.parent.shape != (self.n + 1,) or self.degree.shape != (self.n + 1,):
            raise ValueError("parent and degree must have length n+1")
        if self.n >= 1 and self.parent[1] != 0:
            raise ValueError("root parent slot must hold the sentinel 0")
        idx = np.arange(2, self.n + 1)
        p = self.parent[2:]
        if p.size and not ((p >= 1) & (p < idx)).all():
            raise ValueError("each vertex must attach to a lower-labeled vertex")
        expected = np.bincount(p, minlength=self.n + 1)
        if not np.array_equal(expected, self.degree):
            raise ValueError("degree array does not match parent array")

    def to_parent_string(self) -> str:
        """Serialize as space-separated parents of vertices 1..n, e.g. "0 1 1 2"."""
        return " ".join(str(int(x)) for x in self.parent[1:])

    @classmethod
    def from_parent_string(cls, text: str) -> "RecursiveTree":
        tokens = text.split()
        if not tokens:
            raise ValueError("empty tree string")
        parent = np.zeros(len(tokens) + 1, dtype=np.int64)
        try:
            parent[1:] = [int(t) for t in tokens]
        except ValueError as exc:
            raise ValueError(f"malformed tree string: {exc}") from None
        return cls.from_parents(parent)


@dataclass(frozen=True)
class TailCounts:
    """Degree tail profile of one tree.

    ``z_ge[d]`` counts vertices of degree >= d, for d = 0..max_degree.
    ``z_ge[0] == n`` always, and the sequence is non-increasing.
    """

    n: int
    root_degree: int
    max_degree: int
    z_ge: np.ndarray

    def z_at(self, d: int) -> int:
        if d < 0:
            raise ValueError("degree threshold must be non-negative")
        if d > self.max_degree:
            return 0
        return int(self.z_ge[d])


def tail_from_degrees(degree: np.ndarray) -> TailCounts:
    """Tail counts from a raw degree array (layout as in RecursiveTree)."""
    n = degree.shape[0] - 1
    counts = np.bincount(degree[1:])
    z = counts[::-1].cumsum()[::-1]
    z.setflags(write=False)
    return TailCounts(
        n=n,
        root_degree=int(degree[1]),
        max_degree=counts.shape[0] - 1,
        z_ge=z,
    )


def degree_tail(tree: RecursiveTree) -> TailCounts:
    return tail_from_degrees(tree.degree)


def generate_rrt(n: int, rng: RngStream | np.random.Generator | int) -> RecursiveTree:
    """Draw a uniform random recursive tree on n vertices.

    Consumes exactly n-1 uniforms: vertex i attaches to 1 + floor(u * (i-1)),
    clamped below i (the product can round up to i-1 when u is the largest
    double below 1). The clamp matches :func:`sample_degree_array` so the two
    are stream-identical.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    gen = as_generator(rng)
    parent = np.zeros(n + 1, dtype=np.int64)
    if n > 1:
        u = gen.random(n - 1)
        highs = np.arange(1, n, dtype=np.int64)
        parent[2:] = np.minimum(1 + (u * highs).astype(np.int64), highs)
    degree = np.bincount(parent[2:], minlength=n + 1).astype(np.int64)
    parent.setflags(write=False)
    degree.setflags(write=False)
    return RecursiveTree(n=n, parent=parent, degree=degree)


def sample_degree_array(
    n: int,
    rng: RngStream | np.random.Generator | int,
    out: np.ndarray | None = None,
) -> np.ndarray:
    """Sample just the degree array of a uniform recursive tree.

    Skips building the parent array; useful when only tail counts matter.
    Draw-for-draw identical to :func:`generate_rrt` on the same stream.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    gen = as_generator(rng)
    if out is None:
        out = np.zeros(n + 1, dtype=np.int64)
    else:
        if out.shape != (n + 1,) or out.dtype != np.int64:
            raise ValueError("out must be an int64 array of length n+1")
        out[:] = 0
    if n > 1:
        u = gen.random(n - 1)
        _kernels.degree_fill(u, out)
    return out


def root_subtree_after_removal(
    tree: RecursiveTree, removed: Iterable[int]
) -> set[int]:
    """Vertices still connected to the root after deleting ``removed``.

    A vertex survives iff neither it nor any ancestor was removed. Removing
    the root is rejected: the process that motivates this helper stops before
    ever deleting vertex 1.
    """
    gone = np.zeros(tree.n + 1, dtype=bool)
    for v in removed:
        if not 1 <= v <= tree.n:
            raise ValueError(f"vertex {v} out of range")
        if v == 1:
            raise ValueError("cannot remove the root")
        gone[v] = True
    alive = np.zeros(tree.n + 1, dtype=bool)
    alive[1] = True
    for i in range(2, tree.n + 1):
        alive[i] = alive[tree.parent[i]] and not gone[i]
    return {int(v) for v in np.nonzero(alive)[0]}


def enumerate_increasing_trees(n: int) -> Iterator[RecursiveTree]:
    """Yield all (n-1)! increasing trees on n vertices, for 2 <= n <= 8.

    The cap keeps exhaustive sweeps cheap; 8 vertices is already 5040 trees.
    """
    if not 2 <= n <= 8:
        raise ValueError("exhaustive enumeration supports 2 <= n <= 8")
    for choices in itertools.product(*(range(1, i) for i in range(2, n + 1))):
        parent = np.zeros(n + 1, dtype=np.int64)
        parent[2:] = choices
        degree = np.bincount(parent[2:], minlength=n + 1).astype(np.int64)
        parent.setflags(write=False)
        degree.setflags(write=False)
        yield RecursiveTree(n=n, parent=parent, degree=degree)
