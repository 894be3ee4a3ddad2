"""
Coin families: named constants, reflection coins built from zero masks and
unitary blocks, the conflict-node variant, and coin-group classification.

A reflection coin at node ``v`` only connects an input channel to an output
channel when the input's source neighbor and the output's destination
neighbor are of the same class (conflict or non-conflict). After permuting
rows by destination class and columns by source class the coin is block
diagonal with blocks of size ``k`` and ``2**D - k``, where ``k`` is the
number of conflict neighbors of ``v``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, dft

from .errors import DomainError
from .lattice import Geometry, conflict_mask, neighbor_ranks
from .operators import UNITARY_TOL, CoinField, unitarity_residual

S2 = np.sqrt(2.0)

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / S2
_HADAMARD_MINUS = np.array([[1, 1], [-1, 1]], dtype=np.complex128) / S2
_BALANCED = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=np.complex128) / 2

_COIN_2D_ABOVE = np.array(
    [
        [0, 0, 0, 1],
        [-1j / S2, 1 / 2, 1j / 2, 0],
        [1 / S2, -1j / 2, 1 / 2, 0],
        [0, 1 / S2, 1j / S2, 0],
    ],
    dtype=np.complex128,
)
_COIN_2D_BELOW = np.array(
    [
        [0, -1j / S2, 1 / 2, 1j / 2],
        [0, 1 / S2, -1j / 2, 1 / 2],
        [0, 0, 1 / S2, 1j / S2],
        [1, 0, 0, 0],
    ],
    dtype=np.complex128,
)
# The border coins as given are not unitary: two columns overlap by i.
# Negating the i/sqrt(2) entry in the row that carries both restores
# unitarity and keeps the zero pattern.
_COIN_2D_ABOVE_UNITARY = _COIN_2D_ABOVE.copy()
_COIN_2D_ABOVE_UNITARY[3, 2] = -1j / S2
_COIN_2D_BELOW_UNITARY = _COIN_2D_BELOW.copy()
_COIN_2D_BELOW_UNITARY[2, 3] = -1j / S2
_COIN_CONFLICT_NODE = np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, -1, 0], [1, 0, 0, -1]], dtype=np.complex128
) / S2

_U4 = np.array(
    [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=np.complex128
) / 2
_U6_LEFT = np.array(
    [[-S2 * 1j, 1, 1j], [S2, -1j, 1], [0, S2, -S2 * 1j]], dtype=np.complex128
) / 2
_U8 = np.array(
    [
        [1, 1, 1, 1, 1, 1, 1, 1],
        [1, -1, 1, -1, 1, -1, 1, -1],
        [1, 1, -1, -1, 1, 1, -1, -1],
        [1, -1, -1, 1, 1, -1, -1, 1],
        [1, 1, 1, 1, -1, -1, -1, -1],
        [1, -1, 1, -1, -1, 1, -1, 1],
        [1, 1, -1, -1, -1, -1, 1, 1],
        [1, -1, -1, 1, -1, 1, 1, -1],
    ],
    dtype=np.complex128,
) / (2 * S2)

_NAMED = {
    "hadamard": _HADAMARD,
    "hadamard_minus": _HADAMARD_MINUS,
    "balanced_complex": _BALANCED,
    "coin_2d_above": _COIN_2D_ABOVE,
    "coin_2d_below": _COIN_2D_BELOW,
    "coin_2d_above_unitary": _COIN_2D_ABOVE_UNITARY,
    "coin_2d_below_unitary": _COIN_2D_BELOW_UNITARY,
    "coin_2d_bulk": np.kron(_HADAMARD_MINUS, _HADAMARD_MINUS),
    "coin_conflict_node_4x4": _COIN_CONFLICT_NODE,
    "U2": _HADAMARD,
    "U4": _U4,
    "U6": np.kron(_U6_LEFT, _HADAMARD),
    "U8": _U8,
}


def coin_names() -> list[str]:
    return sorted(_NAMED)


def named_coin(name: str) -> np.ndarray:
    try:
        return _NAMED[name].copy()
    except KeyError:
        raise DomainError(f"unknown coin {name!r}; known: {', '.join(coin_names())}") from None


def fourier_matrix(n: int) -> np.ndarray:
    return dft(n, scale="sqrtn").astype(np.complex128)


@dataclass(frozen=True)
class BlockLibrary:
    """Unitary block per size, used to fill reflection coins."""

    blocks: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for size, m in self.blocks.items():
            if m.shape != (size, size):
                raise DomainError(f"block for size {size} has shape {m.shape}")
            if unitarity_residual(m) > UNITARY_TOL:
                raise DomainError(f"block of size {size} is not unitary")

    def __getitem__(self, size: int) -> np.ndarray:
        if size == 0:
            return np.zeros((0, 0), dtype=np.complex128)
        try:
            return self.blocks[size]
        except KeyError:
            raise DomainError(f"block library has no block of size {size}") from None


def default_library() -> BlockLibrary:
    """U2, U4, U6, U8 for even sizes; unitary DFT for 3, 5, 7; [1] for 1."""
    blocks = {1: np.ones((1, 1), dtype=np.complex128)}
    for n in (3, 5, 7):
        blocks[n] = fourier_matrix(n)
    for n in (2, 4, 6, 8):
        blocks[n] = named_coin(f"U{n}")
    return BlockLibrary(blocks)


# ---------------------------------------------------------------------------
# masks

@dataclass(frozen=True, eq=False)
class ReflectionMask:
    node: tuple[int, ...]
    allowed: np.ndarray  # allowed[r, c]
    dest_conflict: np.ndarray  # per output channel r
    source_conflict: np.ndarray  # per input channel c

    @property
    def k(self) -> int:
        return int(self.source_conflict.sum())

    def grid(self) -> str:
        """ASCII layout with '*' for free entries and '0' for forced zeros."""
        return "\n".join(" ".join("*" if a else "0" for a in row) for row in self.allowed)

    def signature(self) -> str:
        return "".join("1" if a else "0" for a in self.allowed.reshape(-1))


def _class_tables(g: Geometry) -> tuple[np.ndarray, np.ndarray]:
    conflict = conflict_mask(g)
    src, dst = neighbor_ranks(g)
    return conflict[src], conflict[dst]


def reflection_mask(g: Geometry, v) -> ReflectionMask:
    if g.dim == 1:
        raise DomainError("reflection masks need D >= 2")
    v = g.validate(v)
    src_c, dst_c = _class_tables(g)
    r = g.rank(v)
    s, d = src_c[r], dst_c[r]
    return ReflectionMask(v, d[:, None] == s[None, :], d.copy(), s.copy())


def satisfies_mask(coin: np.ndarray, mask: ReflectionMask) -> bool:
    return bool(np.all(np.asarray(coin)[~mask.allowed] == 0))


def build_reflection_coin(g: Geometry, v, lib: BlockLibrary | None = None) -> np.ndarray:
    lib = lib or default_library()
    mask = reflection_mask(g, v)
    k, big = mask.k, g.num_channels
    if int(mask.dest_conflict.sum()) != k:
        raise DomainError(f"mask at {v} is not square-blocked")
    rows = np.concatenate([np.flatnonzero(mask.dest_conflict), np.flatnonzero(~mask.dest_conflict)])
    cols = np.concatenate([np.flatnonzero(mask.source_conflict), np.flatnonzero(~mask.source_conflict)])
    blocks = block_diag(lib[k], lib[big - k])
    coin = np.zeros((big, big), dtype=np.complex128)
    coin[np.ix_(rows, cols)] = blocks
    return coin


def default_bulk(dim: int, lib: BlockLibrary | None = None) -> np.ndarray:
    if dim == 2:
        return named_coin("coin_2d_bulk")
    return (lib or default_library())[2**dim]


def build_reflection_field(g: Geometry, lib: BlockLibrary | None = None, bulk=None) -> CoinField:
    """Conflict-isolating field; nodes with no conflict neighbor get ``bulk``."""
    if g.dim == 1:
        raise DomainError("reflection fields need D >= 2")
    lib = lib or default_library()
    bulk = default_bulk(g.dim, lib) if bulk is None else np.asarray(bulk, dtype=np.complex128)
    src_c, _ = _class_tables(g)
    coins = np.empty((g.num_nodes, g.num_channels, g.num_channels), dtype=np.complex128)
    for r, v in enumerate(g.nodes()):
        coins[r] = bulk if not src_c[r].any() else build_reflection_coin(g, v, lib)
    return CoinField(g, coins)


def build_conflict_node_field(g: Geometry, bulk=None) -> CoinField:
    """Special coin on the diagonal (i, i), a product coin elsewhere."""
    if g.dim != 2:
        raise DomainError("the conflict-node variant is defined for D=2")
    bulk = np.kron(_HADAMARD, _HADAMARD) if bulk is None else np.asarray(bulk, dtype=np.complex128)
    conflict = conflict_mask(g)
    coins = np.where(conflict[:, None, None], _COIN_CONFLICT_NODE[None], bulk[None])
    return CoinField(g, coins)


def is_mask_compliant(f: CoinField) -> bool:
    g = f.geometry
    if g.dim == 1:
        return False
    src_c, dst_c = _class_tables(g)
    allowed = dst_c[:, :, None] == src_c[:, None, :]
    return bool(np.all(f.coins[~allowed] == 0))


# ---------------------------------------------------------------------------
# coin groups (D = 3)

def coin_group_of(g: Geometry, v) -> str:
    if g.dim != 3:
        raise DomainError("coin groups are defined for D=3")
    return reflection_mask(g, v).signature()


def enumerate_coin_groups(
    g: Geometry, include_bulk: bool = False, include_conflict: bool = False
) -> set[str]:
    """Distinct mask signatures.

    By default only border nodes (non-conflict, at least one conflict
    neighbor) are counted; these are the nodes that need special coins.
    """
    if g.dim != 3:
        raise DomainError("coin groups are defined for D=3")
    conflict = conflict_mask(g)
    src_c, _ = _class_tables(g)
    out = set()
    for r, v in enumerate(g.nodes()):
        if conflict[r] and not include_conflict:
            continue
        if not conflict[r] and not src_c[r].any() and not include_bulk:
            continue
        out.add(coin_group_of(g, v))
    return out


# ---------------------------------------------------------------------------
# reconciling the transcribed 2D border coins

@dataclass(frozen=True)
class Relabeling:
    flip_x: bool
    flip_y: bool
    exchange: bool

    def permutation(self) -> list[int]:
        """perm[c] = new label of channel c (codes 2*bx + by)."""
        out = []
        for c in range(4):
            bx, by = c >> 1, c & 1
            bx ^= self.flip_x
            by ^= self.flip_y
            if self.exchange:
                bx, by = by, bx
            out.append(2 * bx + by)
        return out

    def apply(self, m: np.ndarray) -> np.ndarray:
        p = self.permutation()
        out = np.empty_like(m)
        for r in range(4):
            for c in range(4):
                out[p[r], p[c]] = m[r, c]
        return out


@dataclass(frozen=True)
class AdaptationReport:
    """Outcome of searching channel relabelings for the transcribed 2D coins."""

    above: np.ndarray | None
    below: np.ndarray | None
    relabeling: Relabeling | None
    above_offset: int | None  # +2: "above" sits at (i, i+2); -2: at (i, i-2)
    unadapted_fits: bool
    candidates: list[tuple[Relabeling, int]]
    literal_unitarity_residual: float  # before the sign repair

    @property
    def fits(self) -> bool:
        return self.relabeling is not None


def adapt_border_coins(n: int = 11) -> AdaptationReport:
    g = Geometry(2, n)
    plus = reflection_mask(g, (0, 2))
    minus = reflection_mask(g, (0, n - 2))
    literal = max(unitarity_residual(named_coin(n)) for n in ("coin_2d_above", "coin_2d_below"))
    # the sign repair does not move any zero, so the search result is the same for both
    above, below = named_coin("coin_2d_above_unitary"), named_coin("coin_2d_below_unitary")

    def fit(a, b, offset):
        ma, mb = (plus, minus) if offset == 2 else (minus, plus)
        return satisfies_mask(a, ma) and satisfies_mask(b, mb)

    unadapted = fit(above, below, 2) or fit(above, below, -2)
    candidates = []
    for fx, fy, ex in itertools.product((False, True), repeat=3):
        rl = Relabeling(fx, fy, ex)
        a, b = rl.apply(above), rl.apply(below)
        for offset in (2, -2):
            if fit(a, b, offset):
                candidates.append((rl, offset))
    if not candidates:
        return AdaptationReport(None, None, None, None, unadapted, [], literal)
    rl, offset = candidates[0]
    return AdaptationReport(rl.apply(above), rl.apply(below), rl, offset, unadapted, candidates, literal)
