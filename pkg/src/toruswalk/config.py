"""Run configuration: JSON schema, validation and construction of fields and states."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import coins as coinlib
from .analysis import seed_superposition
from .errors import ConfigError, DomainError
from .lattice import Geometry, channel_code
from .operators import CoinField, tensor_evolution_fields
from .state import (
    WalkState,
    antisymmetrize,
    basis_state,
    class_pure_inner,
    mirrored_antisymmetric,
)

SCHEMES = ("hadamard_product", "reflection", "conflict_node", "fermionic_pair", "mirrored_pair", "custom")
INITIAL_TYPES = ("basis", "fermionic", "mirrored", "seed_superposition", "explicit")

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_PLAYER = {
    "type": "object",
    "properties": {
        "node": {"type": "integer", "minimum": 1},
        "inner": {"type": "array", "items": _COMPLEX, "minItems": 2, "maxItems": 2},
    },
    "required": ["node", "inner"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "dim": {"enum": [1, 2, 3]},
        "n": {"type": "integer", "minimum": 3},
        "scheme": {"enum": list(SCHEMES)},
        "coin_file": {"type": "string"},
        "player_coin": {"type": "string"},
        "initial": {
            "type": "object",
            "properties": {
                "type": {"enum": list(INITIAL_TYPES)},
                "node": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "inner": {"type": "array", "items": _COMPLEX},
                "players": {"type": "array", "items": _PLAYER, "minItems": 2, "maxItems": 2},
                "x_star": {"type": "integer", "minimum": 1},
                "sign": {"enum": [-1, 1]},
                "amplitudes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "node": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                            "channel": {"type": "string", "pattern": "^[LR]{1,3}$"},
                            "amp": _COMPLEX,
                        },
                        "required": ["node", "channel", "amp"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["type"],
            "additionalProperties": False,
        },
        "steps": {"type": "integer", "minimum": 1},
        "outputs": {
            "type": "object",
            "properties": {
                k: {"type": "string"}
                for k in ("avg_csv", "per_step_csv", "heatmap_pgm", "report_json", "state_csv", "rounds_json", "rounds_csv")
            },
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "rounds": {"type": "integer", "minimum": 1},
        "t_meas": {"type": "integer", "minimum": 1},
    },
    "required": ["dim", "n", "scheme"],
    "additionalProperties": False,
}

# reference start states, 1-based labels
_INNER_2D = [[0, 0.5], [0.5, 0], [-0.5, 0], [0, 0.5]]
_H = 2**-0.5
_PLAYERS = [
    {"node": 2, "inner": [[_H, 0], [0, _H]]},
    {"node": 8, "inner": [[0, _H], [_H, 0]]},
]


@dataclass(frozen=True)
class RunConfig:
    doc: dict
    base_dir: Path

    @property
    def geometry(self) -> Geometry:
        return Geometry(self.doc["dim"], self.doc["n"])

    @property
    def scheme(self) -> str:
        return self.doc["scheme"]

    @property
    def steps(self) -> int:
        return self.doc.get("steps", 200)

    @property
    def outputs(self) -> dict:
        return self.doc.get("outputs", {})

    @property
    def seed(self):
        return self.doc.get("seed")

    @property
    def rounds(self):
        return self.doc.get("rounds")

    @property
    def t_meas(self) -> int:
        return self.doc.get("t_meas", self.steps)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate(doc) -> None:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    if "steps" in doc and not _is_int(doc["steps"]):
        raise ConfigError("steps must be an integer")
    if doc["scheme"] == "custom" and "coin_file" not in doc:
        raise ConfigError("scheme 'custom' requires coin_file")


def parse_config(doc: dict, base_dir: Path | str = ".") -> RunConfig:
    validate(doc)
    return RunConfig(doc, Path(base_dir))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc, path.parent)


def _complex_list(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def _player_coin(cfg: RunConfig, default: str) -> np.ndarray:
    coin = coinlib.named_coin(cfg.doc.get("player_coin", default))
    if coin.shape != (2, 2):
        raise ConfigError("player_coin must name a 2x2 coin")
    return coin


def build_field(cfg: RunConfig) -> CoinField:
    g = cfg.geometry
    scheme = cfg.scheme
    try:
        if scheme == "hadamard_product":
            c = _player_coin(cfg, "hadamard_minus")
            m = c
            for _ in range(g.dim - 1):
                m = np.kron(m, c)
            return CoinField.uniform(g, m)
        if scheme == "reflection":
            return coinlib.build_reflection_field(g)
        if scheme == "conflict_node":
            return coinlib.build_conflict_node_field(g)
        if scheme in ("fermionic_pair", "mirrored_pair"):
            if g.dim != 2:
                raise ConfigError(f"scheme {scheme!r} needs dim=2")
            c = _player_coin(cfg, "hadamard_minus" if scheme == "fermionic_pair" else "balanced_complex")
            return tensor_evolution_fields(c, c, g.size)
        path = Path(cfg.doc["coin_file"])
        if not path.is_absolute():
            path = cfg.base_dir / path
        f = CoinField.load(path)
        if f.geometry != g:
            raise ConfigError(f"coin file geometry {f.geometry} does not match config")
        return f
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _default_initial(cfg: RunConfig) -> dict:
    scheme, dim = cfg.scheme, cfg.geometry.dim
    if scheme == "fermionic_pair":
        return {"type": "fermionic"}
    if scheme == "mirrored_pair":
        return {"type": "mirrored", "x_star": 1}
    if scheme == "reflection" and dim == 3:
        return {"type": "seed_superposition"}
    if scheme in ("reflection", "conflict_node") and dim == 2:
        return {"type": "basis", "node": [2, 8], "inner": _INNER_2D}
    raise ConfigError(f"scheme {scheme!r} with dim={dim} needs an explicit 'initial'")


def _player_states(g1: Geometry, spec: dict) -> list[WalkState]:
    return [
        basis_state(g1, g1.from_labels(p["node"]), _complex_list(p["inner"]))
        for p in spec.get("players", _PLAYERS)
    ]


def build_initial(cfg: RunConfig, field: CoinField) -> WalkState:
    g = cfg.geometry
    spec = cfg.doc.get("initial") or _default_initial(cfg)
    kind = spec["type"]
    try:
        if kind == "basis":
            if "node" not in spec:
                raise ConfigError("basis initial state needs 'node'")
            v = g.from_labels(spec["node"])
            inner = _complex_list(spec["inner"]) if "inner" in spec else class_pure_inner(g, v) if g.dim > 1 else np.array([1, 0])
            return basis_state(g, v, inner)
        if kind in ("fermionic", "mirrored"):
            if g.dim != 2:
                raise ConfigError(f"{kind} initial states need dim=2")
            a, b = _player_states(Geometry(1, g.size), spec)
            if kind == "fermionic":
                return antisymmetrize(a, b, spec.get("sign", -1))
            x_star = Geometry(1, g.size).from_labels(spec.get("x_star", 1))[0]
            return mirrored_antisymmetric(a, b, x_star)
        if kind == "seed_superposition":
            return seed_superposition(field)
        amps = np.zeros((g.num_nodes, g.num_channels), dtype=np.complex128)
        for entry in spec.get("amplitudes", []):
            c = channel_code(entry["channel"])
            if len(entry["channel"]) != g.dim:
                raise ConfigError(f"channel {entry['channel']!r} does not fit dim={g.dim}")
            amps[g.rank(g.from_labels(entry["node"])), c] += complex(*entry["amp"])
        return WalkState.from_vector(g, amps)
    except DomainError as exc:
        raise ConfigError(f"initial state: {exc}") from None
