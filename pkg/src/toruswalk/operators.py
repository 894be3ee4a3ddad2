"""
Coin fields, the shift permutation and time evolution ``W = S . C``.

The production path never forms ``W``: a step multiplies each node's
channel vector by its coin, then gathers amplitudes through a precomputed
index permutation. :func:`materialize_dense` builds ``W`` explicitly from
its definition and is meant for oracle checks on small instances.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DomainError, ConfigError, InvariantError, NonUnitaryCoinError
from .lattice import Geometry, neighbor_ranks
from .state import NORM_TOL, WalkState

UNITARY_TOL = 1e-10
DENSE_CAP = 4096


def unitarity_residual(m: np.ndarray) -> float:
    """max |M^H M - I| elementwise."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass(frozen=True, eq=False)
class CoinField:
    """One 2**D x 2**D unitary per node, rows = output channel, cols = input."""

    geometry: Geometry
    coins: np.ndarray

    def __post_init__(self):
        g = self.geometry
        k = g.num_channels
        c = np.array(self.coins, dtype=np.complex128)
        if c.shape != (g.num_nodes, k, k):
            raise DomainError(f"coin array shape {c.shape}, expected {(g.num_nodes, k, k)}")
        if not np.all(np.isfinite(c)):
            raise DomainError("coin field contains non-finite entries")
        gram = np.einsum("nji,njk->nik", c.conj(), c)
        resid = np.max(np.abs(gram - np.eye(k)), axis=(1, 2))
        bad = np.flatnonzero(resid > UNITARY_TOL)
        if bad.size:
            r = int(bad[0])
            raise NonUnitaryCoinError(g.to_labels(g.node(r)), float(resid[r]))
        c.setflags(write=False)
        object.__setattr__(self, "coins", c)

    @classmethod
    def uniform(cls, g: Geometry, coin) -> "CoinField":
        coin = np.asarray(coin, dtype=np.complex128)
        return cls(g, np.broadcast_to(coin, (g.num_nodes,) + coin.shape))

    @classmethod
    def from_function(cls, g: Geometry, fn: Callable[[tuple[int, ...]], np.ndarray]) -> "CoinField":
        return cls(g, np.stack([np.asarray(fn(v), dtype=np.complex128) for v in g.nodes()]))

    def coin(self, v: Sequence[int]) -> np.ndarray:
        return self.coins[self.geometry.rank(v)]

    @property
    def support(self) -> np.ndarray:
        """Structural nonzeros, shape (num_nodes, K, K)."""
        return self.coins != 0

    def max_unitarity_residual(self) -> float:
        k = self.geometry.num_channels
        gram = np.einsum("nji,njk->nik", self.coins.conj(), self.coins)
        return float(np.max(np.abs(gram - np.eye(k))))

    # -- JSON ------------------------------------------------------------
    def to_json_dict(self) -> dict:
        g = self.geometry
        keys = [c.tobytes() for c in self.coins]
        counts: dict[bytes, int] = {}
        for kb in keys:
            counts[kb] = counts.get(kb, 0) + 1
        default_key = max(counts, key=lambda kb: (counts[kb], -keys.index(kb)))
        default = self.coins[keys.index(default_key)]
        coins = [
            {"node": list(g.to_labels(g.node(r))), "matrix": _matrix_to_json(self.coins[r])}
            for r, kb in enumerate(keys)
            if kb != default_key
        ]
        return {"dim": g.dim, "n": g.size, "coins": coins, "default": _matrix_to_json(default)}

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CoinField":
        try:
            g = Geometry(int(doc["dim"]), int(doc["n"]))
            k = g.num_channels
            coins = np.empty((g.num_nodes, k, k), dtype=np.complex128)
            if "default" in doc:
                coins[:] = _matrix_from_json(doc["default"], k)
            else:
                coins[:] = np.nan
            for entry in doc.get("coins", []):
                coins[g.rank(g.from_labels(entry["node"]))] = _matrix_from_json(entry["matrix"], k)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed coin document: {exc}") from exc
        if np.isnan(coins).any():
            raise ConfigError("coin document leaves some nodes without a coin")
        return cls(g, coins)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "CoinField":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_json_dict(doc)


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(rows, k: int) -> np.ndarray:
    m = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)
    if m.shape != (k, k):
        raise ValueError(f"matrix shape {m.shape}, expected {(k, k)}")
    return m


# ---------------------------------------------------------------------------
# evolution kernel

@lru_cache(maxsize=None)
def shift_gather(g: Geometry) -> np.ndarray:
    """``new[i] = old[gather[i]]`` realizes the shift on flat states."""
    src, _ = neighbor_ranks(g)
    k = g.num_channels
    gather = (src * k + np.arange(k)[None, :]).reshape(-1)
    if not np.array_equal(np.sort(gather), np.arange(g.state_length)):
        raise InvariantError("shift is not a permutation")
    gather.setflags(write=False)
    return gather


def _thread_count() -> int:
    raw = os.environ.get("TORUSWALK_THREADS", "0")
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


def _coin_chunk(coins: np.ndarray, amps: np.ndarray, out: np.ndarray) -> None:
    # channel-ascending accumulation keeps results bit-reproducible
    out[:] = coins[:, :, 0] * amps[:, 0, None]
    for j in range(1, amps.shape[1]):
        out += coins[:, :, j] * amps[:, j, None]


def apply_coins(coins: np.ndarray, amps: np.ndarray, threads: int | None = None) -> np.ndarray:
    threads = _thread_count() if threads is None else threads
    out = np.empty_like(amps)
    m = amps.shape[0]
    if threads <= 1 or m < 2 * threads:
        _coin_chunk(coins, amps, out)
        return out
    bounds = np.linspace(0, m, threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_coin_chunk, coins[a:b], amps[a:b], out[a:b])
            for a, b in zip(bounds[:-1], bounds[1:])
        ]
        for fut in futures:
            fut.result()
    return out


def _check_geometry(s: WalkState, f: CoinField):
    if s.geometry != f.geometry:
        raise DomainError(f"state geometry {s.geometry} != coin geometry {f.geometry}")


def step(s: WalkState, f: CoinField, threads: int | None = None) -> WalkState:
    """One application of W = S . C."""
    _check_geometry(s, f)
    mixed = apply_coins(f.coins, s.by_node, threads)
    return WalkState(s.geometry, mixed.reshape(-1)[shift_gather(s.geometry)])


def _check_every() -> int:
    return 1 if os.environ.get("TORUSWALK_DEBUG") else 100


def iter_states(s: WalkState, f: CoinField, steps: int, check_every: int | None = None) -> Iterator[WalkState]:
    """Yield the ``steps + 1`` states s, Ws, ..., W^steps s."""
    if steps < 0:
        raise DomainError("step count must be >= 0")
    _check_geometry(s, f)
    every = check_every or _check_every()
    yield s
    for t in range(1, steps + 1):
        s = step(s, f)
        if t % every == 0:
            drift = abs(s.norm() - 1.0)
            if drift > NORM_TOL:
                raise InvariantError(f"norm drift {drift:.3e} at step {t}")
        yield s


def evolve(s: WalkState, f: CoinField, steps: int) -> list[WalkState]:
    return list(iter_states(s, f, steps))


def materialize_dense(f: CoinField) -> np.ndarray:
    """Explicit W with W[(v - e(r), r), (v, c)] = C_v[r, c]."""
    g = f.geometry
    if g.state_length > DENSE_CAP:
        raise DomainError(f"state length {g.state_length} exceeds dense cap {DENSE_CAP}")
    k = g.num_channels
    w = np.zeros((g.state_length, g.state_length), dtype=np.complex128)
    for v in g.nodes():
        u = g.rank(v)
        for r in range(k):
            bits = [(r >> (g.dim - 1 - a)) & 1 for a in range(g.dim)]
            dest = g.wrap(x - (1 - 2 * b) for x, b in zip(v, bits))
            row = g.rank(dest) * k + r
            for c in range(k):
                w[row, u * k + c] = f.coins[u, r, c]
    return w


# ---------------------------------------------------------------------------
# products and symmetry diagnostics

def _as_coin_array(c, n: int) -> np.ndarray:
    if isinstance(c, CoinField):
        if c.geometry.dim != 1:
            raise DomainError("player coin fields must be one-dimensional")
        arr = c.coins
    else:
        arr = np.asarray(c, dtype=np.complex128)
        if arr.shape == (2, 2):
            arr = np.broadcast_to(arr, (n, 2, 2))
    if arr.shape != (n, 2, 2):
        raise DomainError(f"player coin map shape {arr.shape}, expected {(n, 2, 2)}")
    return arr


def tensor_evolution_fields(coin_a, coin_b, n: int | None = None) -> CoinField:
    """Joint field with coin C_A(x) (x) C_B(y) at node (x, y)."""
    if n is None:
        for c in (coin_a, coin_b):
            if isinstance(c, CoinField):
                n = c.geometry.size
                break
            if np.ndim(c) == 3:
                n = len(c)
                break
        else:
            raise DomainError("cycle length unknown; pass n")
    a, b = _as_coin_array(coin_a, n), _as_coin_array(coin_b, n)
    joint = np.einsum("xij,ykl->xyikjl", a, b).reshape(n * n, 4, 4)
    return CoinField(Geometry(2, n), joint)


def _permutation_operator(g: Geometry, image: Callable[[tuple, int], tuple[tuple, int]]) -> np.ndarray:
    """Dense P with P|v, c> = |image(v, c)>."""
    if g.state_length > DENSE_CAP:
        raise DomainError("operator too large to materialize")
    k = g.num_channels
    p = np.zeros((g.state_length, g.state_length))
    for v in g.nodes():
        for c in range(k):
            w, d = image(v, c)
            p[g.rank(w) * k + d, g.rank(v) * k + c] = 1.0
    return p


def position_swap_operator(g: Geometry) -> np.ndarray:
    if g.dim != 2:
        raise DomainError("position swap acts on D=2 joint states")
    return _permutation_operator(g, lambda v, c: ((v[1], v[0]), c))


def full_swap_operator(g: Geometry) -> np.ndarray:
    if g.dim != 2:
        raise DomainError("full swap acts on D=2 joint states")
    return _permutation_operator(g, lambda v, c: ((v[1], v[0]), ((c & 1) << 1) | (c >> 1)))


def joint_mirror_operator(g: Geometry, x_star: int) -> np.ndarray:
    if g.dim != 2:
        raise DomainError("joint mirror acts on D=2 joint states")
    n = g.size
    return _permutation_operator(
        g, lambda v, c: (((2 * x_star - v[0]) % n, (2 * x_star - v[1]) % n), c ^ 3)
    )


def symmetry_residual(f: CoinField, p: np.ndarray) -> float:
    """max |P W - W P| for a unitary P on the same index space."""
    w = materialize_dense(f)
    p = np.asarray(p)
    if p.shape != w.shape:
        raise DomainError(f"operator shape {p.shape} does not match W {w.shape}")
    return float(np.max(np.abs(p @ w - w @ p)))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    from scipy.stats import unitary_group

    return unitary_group.rvs(dim, random_state=rng)


def random_product_field(n: int, rng: np.random.Generator) -> CoinField:
    """Joint field C_A(x) (x) C_B(y) with independent Haar coins per node."""
    a = np.stack([random_unitary(2, rng) for _ in range(n)])
    b = np.stack([random_unitary(2, rng) for _ in range(n)])
    return tensor_evolution_fields(a, b)


@dataclass(frozen=True)
class ObstructionWitness:
    """Why no coin at the swap-fixed node can make W commute with the position swap.

    The commutation forces rows LR and RL of the coin to coincide; a
    matrix with two equal rows is singular and cannot be unitary.
    """

    constraint_residual: float  # ||row LR - row RL|| of the given coin
    input_unitarity_residual: float
    forced_gram_defect: float  # ||G - I||_max after imposing the equal rows
    forced_determinant: complex
    satisfiable: bool

    @property
    def verdict(self) -> str:
        return "satisfiable" if self.satisfiable else "unsatisfiable"


def _row_gram_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))


def fermion_obstruction_witness(coin) -> ObstructionWitness:
    c = np.asarray(coin, dtype=np.complex128)
    if c.shape != (4, 4):
        raise DomainError(f"expected a 4x4 coin, got shape {c.shape}")
    forced = c.copy()
    forced[1] = forced[2] = (c[1] + c[2]) / 2
    defect = _row_gram_defect(forced)
    # equal rows give rank <= 3: the constrained coin is never unitary
    return ObstructionWitness(
        constraint_residual=float(np.linalg.norm(c[1] - c[2])),
        input_unitarity_residual=_row_gram_defect(c),
        forced_gram_defect=defect,
        forced_determinant=complex(np.linalg.det(forced)),
        satisfiable=defect <= UNITARY_TOL,
    )
