"""
Multi-player decision rounds driven by walk measurements.

Each round starts a fresh walk from the same initial state, evolves it for
``t_meas`` steps and measures the position; player ``i`` takes coordinate
``i`` of the observed node as its option. Rounds are therefore i.i.d.
draws from one distribution, sampled by inverse CDF from a single
``numpy.random.Generator`` (PCG64) stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
import numpy as np

from .errors import DomainError
from .lattice import conflict_mask
from .operators import CoinField, iter_states
from .state import NORM_TOL, WalkState, position_distribution


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _cdf(probs: np.ndarray) -> np.ndarray:
    p = np.asarray(probs, dtype=float).reshape(-1)
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL or np.any(p < 0):
        raise DomainError(f"distribution sums to {total:.17g}, expected 1")
    return np.cumsum(p) / total


def _draw(cdf: np.ndarray, probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(cdf, u, side="right")
    # u can exceed the last cdf entry by rounding; pin to the last supported cell
    last = int(np.flatnonzero(probs.reshape(-1) > 0)[-1])
    return np.minimum(idx, last)


def sample_measurement(probs: np.ndarray, rng: np.random.Generator) -> tuple[int, ...]:
    """Draw one node (internal coordinates) from a per-node distribution."""
    probs = np.asarray(probs, dtype=float)
    idx = int(_draw(_cdf(probs), probs, np.array([rng.random()]))[0])
    return tuple(int(x) for x in np.unravel_index(idx, probs.shape))


def sample_many(probs: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    """Flat node ranks of ``count`` draws; same stream consumption as repeated
    :func:`sample_measurement` calls."""
    probs = np.asarray(probs, dtype=float)
    return _draw(_cdf(probs), probs, rng.random(count))


@dataclass(frozen=True)
class RoundConfig:
    players: int
    options: int
    field: CoinField
    initial: WalkState
    t_meas: int = 200
    rounds: int = 1000
    seed: int | None = None
    scheme: str = "custom"

    def __post_init__(self):
        if self.players not in (2, 3):
            raise DomainError("players must be 2 or 3")
        g = self.field.geometry
        if g.dim != self.players or g.size != self.options:
            raise DomainError(
                f"scheme {self.scheme!r} runs on D={g.dim}, N={g.size}; "
                f"config asks for {self.players} players and {self.options} options"
            )
        if self.initial.geometry != g:
            raise DomainError("initial state and coin field geometries differ")
        if self.t_meas < 1 or self.rounds < 1:
            raise DomainError("t_meas and rounds must be >= 1")


@dataclass(frozen=True, eq=False)
class RoundStats:
    players: int
    options: int
    rounds: int
    conflict_count: int
    selections: np.ndarray  # (players, options)
    joint_counts: np.ndarray  # (options,)*players
    distribution: np.ndarray  # measured-time distribution the rounds were drawn from

    @property
    def conflict_rate(self) -> float:
        return self.conflict_count / self.rounds

    def to_json_dict(self) -> dict:
        nz = np.argwhere(self.joint_counts > 0)
        return {
            "players": self.players,
            "options": self.options,
            "rounds": self.rounds,
            "conflict_count": self.conflict_count,
            "conflict_rate": self.conflict_rate,
            "selections": self.selections.tolist(),
            "joint_counts": [
                {"action": [int(x) + 1 for x in idx], "count": int(self.joint_counts[tuple(idx)])}
                for idx in nz
            ],
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=1) + "\n")

    def write_csv(self, path) -> None:
        axes = "xyz"[: self.players]
        lines = [",".join(axes) + ",count,frequency"]
        for idx in np.ndindex(self.joint_counts.shape):
            c = int(self.joint_counts[idx])
            labels = ",".join(str(i + 1) for i in idx)
            lines.append(f"{labels},{c},{c / self.rounds:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")


def measured_distribution(initial: WalkState, field: CoinField, t_meas: int) -> np.ndarray:
    for s in iter_states(initial, field, t_meas):
        pass
    return position_distribution(s)


def run_rounds(cfg: RoundConfig) -> RoundStats:
    g = cfg.field.geometry
    probs = measured_distribution(cfg.initial, cfg.field, cfg.t_meas)
    rng = make_rng(cfg.seed)
    ranks = sample_many(probs, rng, cfg.rounds)
    joint = np.bincount(ranks, minlength=g.num_nodes)
    coords = g.coords[ranks]
    selections = np.stack(
        [np.bincount(coords[:, a], minlength=g.size) for a in range(g.dim)]
    )
    conflicts = int(joint[conflict_mask(g)].sum())
    return RoundStats(
        cfg.players, cfg.options, cfg.rounds, conflicts, selections, joint.reshape(g.shape), probs
    )
