"""
Geometry of the N-cycle torus, channel algebra and node classification.

Nodes are stored as tuples of 0-based residues mod N. The 1-based labels
used in files and on the command line are converted at the boundary with
:meth:`Geometry.from_labels` and :meth:`Geometry.to_labels`.

Channels are D-bit integers with axis 0 in the most significant bit and
bit value 0 for ``L``, 1 for ``R``. For D=3 the order is therefore
LLL, LLR, LRL, LRR, RLL, RLR, RRL, RRR.

Under the evolution (coin, then shift) an amplitude leaving node ``v`` in
channel ``c`` lands on ``v - e(c)``; equivalently the amplitude in channel
``c`` at ``v`` arrived from ``v + e(c)``, where ``e`` is +1 per ``L`` axis
and -1 per ``R`` axis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError

Node = tuple[int, ...]


@dataclass(frozen=True)
class Geometry:
    """A D-dimensional torus with N nodes per cycle."""

    dim: int
    size: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not isinstance(self.size, (int, np.integer)) or self.size < 3:
            raise DomainError(f"cycle length must be an integer >= 3, got {self.size}")

    @property
    def num_nodes(self) -> int:
        return self.size**self.dim

    @property
    def num_channels(self) -> int:
        return 2**self.dim

    @property
    def state_length(self) -> int:
        return self.num_nodes * self.num_channels

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.size,) * self.dim

    def validate(self, v: Sequence[int]) -> Node:
        v = tuple(int(x) for x in v)
        if len(v) != self.dim:
            raise DomainError(f"node {v} has {len(v)} coordinates, expected {self.dim}")
        if any(x < 0 or x >= self.size for x in v):
            raise DomainError(f"node {v} outside [0, {self.size}) on some axis")
        return v

    def rank(self, v: Sequence[int]) -> int:
        """Row-major rank of an internal node."""
        r = 0
        for x in self.validate(v):
            r = r * self.size + x
        return r

    def node(self, rank: int) -> Node:
        if not 0 <= rank < self.num_nodes:
            raise DomainError(f"node rank {rank} out of range")
        return tuple(int(x) for x in np.unravel_index(rank, self.shape))

    def nodes(self) -> Iterator[Node]:
        return itertools.product(range(self.size), repeat=self.dim)

    @cached_property
    def coords(self) -> np.ndarray:
        """All internal node coordinates, shape (num_nodes, dim), in rank order."""
        grids = np.indices(self.shape).reshape(self.dim, -1)
        return grids.T.copy()

    def wrap(self, v: Sequence[int]) -> Node:
        return tuple(int(x) % self.size for x in v)

    def from_labels(self, labels: Sequence[int] | int) -> Node:
        """1-based external labels to internal coordinates."""
        if isinstance(labels, (int, np.integer)):
            labels = (labels,)
        labels = tuple(int(x) for x in labels)
        if len(labels) != self.dim or any(x < 1 or x > self.size for x in labels):
            raise DomainError(f"labels {labels} invalid for N={self.size}, D={self.dim}")
        return tuple(x - 1 for x in labels)

    def to_labels(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(x + 1 for x in self.validate(v))


@dataclass(frozen=True)
class DifferenceGroup:
    """Node class ``<l, m>`` with l = (j - i) mod N, m = (k - j) mod N."""

    l: int
    m: int

    def label(self, n: int) -> tuple[int, int]:
        """The residue 0 written as N, as in the usual notation."""
        return (self.l or n, self.m or n)


@dataclass(frozen=True)
class ConflictAdjacency:
    source_conflict_channels: frozenset[int]
    dest_conflict_channels: frozenset[int]

    @property
    def k(self) -> int:
        return len(self.source_conflict_channels)


# ---------------------------------------------------------------------------
# channels

def channel_bits(c: int, dim: int) -> tuple[int, ...]:
    if not 0 <= c < 2**dim:
        raise DomainError(f"channel {c} invalid for D={dim}")
    return tuple((c >> (dim - 1 - a)) & 1 for a in range(dim))


def channel_name(c: int, dim: int) -> str:
    return "".join("LR"[b] for b in channel_bits(c, dim))


def channel_code(name: str) -> int:
    name = name.upper()
    if not name or set(name) - {"L", "R"} or len(name) > 3:
        raise DomainError(f"bad channel name {name!r}")
    code = 0
    for ch in name:
        code = (code << 1) | (ch == "R")
    return code


def channel_names(dim: int) -> list[str]:
    return [channel_name(c, dim) for c in range(2**dim)]


def complement(c: int, dim: int) -> int:
    return c ^ (2**dim - 1)


def channel_source_offset(c: int, dim: int) -> tuple[int, ...]:
    """Offset e(c): the channel at v arrived from v + e(c) and leaves for v - e(c)."""
    return tuple(1 - 2 * b for b in channel_bits(c, dim))


@lru_cache(maxsize=None)
def offset_table(dim: int) -> np.ndarray:
    """e(c) for every channel, shape (2**dim, dim)."""
    return np.array([channel_source_offset(c, dim) for c in range(2**dim)], dtype=np.int64)


# ---------------------------------------------------------------------------
# node classification

def is_conflict_node(g: Geometry, v: Sequence[int]) -> bool:
    v = g.validate(v)
    return len(set(v)) < len(v)


def conflict_mask(g: Geometry) -> np.ndarray:
    """Boolean conflict flag for every node in rank order."""
    c = g.coords
    if g.dim == 1:
        return np.zeros(g.num_nodes, dtype=bool)
    out = np.zeros(g.num_nodes, dtype=bool)
    for a, b in itertools.combinations(range(g.dim), 2):
        out |= c[:, a] == c[:, b]
    return out


@lru_cache(maxsize=None)
def neighbor_ranks(g: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """Source and destination node ranks per (node, channel).

    ``src[u, c]`` is the rank of ``u + e(c)``, ``dst[u, c]`` of ``u - e(c)``.
    """
    e = offset_table(g.dim)
    c = g.coords[:, None, :]
    weights = g.size ** np.arange(g.dim - 1, -1, -1)
    src = ((c + e[None]) % g.size) @ weights
    dst = ((c - e[None]) % g.size) @ weights
    src.setflags(write=False)
    dst.setflags(write=False)
    return src, dst


def conflict_adjacency(g: Geometry, v: Sequence[int]) -> ConflictAdjacency:
    if g.dim == 1:
        raise DomainError("conflict adjacency needs D >= 2")
    v = g.validate(v)
    sources, dests = set(), set()
    for c in range(g.num_channels):
        e = channel_source_offset(c, g.dim)
        if is_conflict_node(g, g.wrap(x + d for x, d in zip(v, e))):
            sources.add(c)
        if is_conflict_node(g, g.wrap(x - d for x, d in zip(v, e))):
            dests.add(c)
    return ConflictAdjacency(frozenset(sources), frozenset(dests))


def is_border_node(g: Geometry, v: Sequence[int]) -> bool:
    """Non-conflict node with at least one conflict neighbor."""
    return not is_conflict_node(g, v) and conflict_adjacency(g, v).k > 0


# ---------------------------------------------------------------------------
# difference groups (D = 3)

def difference_group(g: Geometry, v: Sequence[int]) -> DifferenceGroup:
    if g.dim != 3:
        raise DomainError("difference groups are defined for D=3 only")
    i, j, k = g.validate(v)
    return DifferenceGroup((j - i) % g.size, (k - j) % g.size)


def is_conflict_group(n: int, dg: DifferenceGroup) -> bool:
    if not (0 <= dg.l < n and 0 <= dg.m < n):
        raise DomainError(f"{dg} not reduced mod {n}")
    return dg.l == 0 or dg.m == 0 or (dg.l + dg.m) % n == 0


def group_transitions() -> frozenset[tuple[int, int]]:
    """Images of the 8 node shifts under (dl, dm) = (s2 - s1, s3 - s2)."""
    return frozenset(
        (s[1] - s[0], s[2] - s[1]) for s in itertools.product((1, -1), repeat=3)
    )


def group_members(n: int, dg: DifferenceGroup) -> list[Node]:
    return [(i, (i + dg.l) % n, (i + dg.l + dg.m) % n) for i in range(n)]


def pure_channels(g: Geometry, v: Sequence[int]) -> list[int]:
    """Channels at ``v`` whose source neighbor has the same class as ``v``.

    Amplitude confined to these channels never crosses between conflict and
    non-conflict nodes under a reflection coin field.
    """
    v = g.validate(v)
    mine = is_conflict_node(g, v)
    out = []
    for c in range(g.num_channels):
        e = channel_source_offset(c, g.dim)
        if is_conflict_node(g, g.wrap(x + d for x, d in zip(v, e))) == mine:
            out.append(c)
    return out
