"""
Walk states: normalized complex amplitude vectors over (node, channel).

The flat index of ``(v, c)`` is ``rank(v) * 2**D + c``. A two-player joint
state is an ordinary D=2 state read as a tensor product: node ``(x, y)``
with channel ``(J_A, J_B)`` is ``|x>|J_A> (x) |y>|J_B>``, channel code
``2 * J_A + J_B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .lattice import Geometry, pure_channels

NORM_TOL = 1e-9
INNER_TOL = 1e-6
ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WalkState:
    """Immutable state vector on a geometry.

    ``prenorm`` records the norm of the vector before normalization, since
    entangled sums are often written without their prefactor.
    """

    geometry: Geometry
    amps: np.ndarray
    prenorm: float = field(default=1.0)

    def __post_init__(self):
        a = np.ascontiguousarray(self.amps, dtype=np.complex128).reshape(-1)
        if a.size != self.geometry.state_length:
            raise DomainError(
                f"expected {self.geometry.state_length} amplitudes, got {a.size}"
            )
        if not np.all(np.isfinite(a)):
            raise DomainError("state contains non-finite amplitudes")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_vector(cls, g: Geometry, vec, normalize: bool = True) -> "WalkState":
        vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
        if not normalize:
            return cls(g, vec)
        nrm = float(np.linalg.norm(vec))
        if nrm < ZERO_TOL:
            raise DomainError("zero vector cannot be normalized")
        return cls(g, vec / nrm, prenorm=nrm)

    @property
    def by_node(self) -> np.ndarray:
        """View of shape (num_nodes, num_channels)."""
        return self.amps.reshape(self.geometry.num_nodes, self.geometry.num_channels)

    @property
    def tensor(self) -> np.ndarray:
        """View of shape (N,)*D + (2**D,)."""
        g = self.geometry
        return self.amps.reshape(g.shape + (g.num_channels,))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def amplitude(self, v: Sequence[int], c: int) -> complex:
        return complex(self.by_node[self.geometry.rank(v), c])

    def __repr__(self):
        g = self.geometry
        return f"WalkState(dim={g.dim}, n={g.size}, norm={self.norm():.12f})"


def _require_dim(s: WalkState, dim: int, what: str):
    if s.geometry.dim != dim:
        raise DomainError(f"{what} needs a D={dim} state, got D={s.geometry.dim}")


def basis_state(g: Geometry, v: Sequence[int], inner) -> WalkState:
    """Walker localized at ``v`` with inner state ``inner`` (length 2**D)."""
    inner = np.asarray(inner, dtype=np.complex128).reshape(-1)
    if inner.size != g.num_channels:
        raise DomainError(f"inner state needs {g.num_channels} entries, got {inner.size}")
    nrm = float(np.linalg.norm(inner))
    if nrm < ZERO_TOL:
        raise DomainError("inner state is the zero vector")
    if abs(nrm - 1.0) > INNER_TOL:
        raise DomainError(f"inner state has norm {nrm:.9g}, expected 1")
    amps = np.zeros((g.num_nodes, g.num_channels), dtype=np.complex128)
    amps[g.rank(v)] = inner / nrm
    return WalkState(g, amps, prenorm=nrm)


def class_pure_inner(g: Geometry, v: Sequence[int]) -> np.ndarray:
    """Uniform inner state over the channels of ``v`` fed by same-class neighbors."""
    chans = pure_channels(g, v)
    if not chans:
        raise DomainError(f"node {v} has no channel fed by a node of its own class")
    inner = np.zeros(g.num_channels, dtype=np.complex128)
    inner[chans] = 1 / np.sqrt(len(chans))
    return inner


def position_distribution(s: WalkState) -> np.ndarray:
    """Probability of observing the walker at each node, shape (N,)*D."""
    p = np.sum(np.abs(s.by_node) ** 2, axis=1)
    return p.reshape(s.geometry.shape)


# ---------------------------------------------------------------------------
# two-player constructions

def _pair_geometry(a: WalkState, b: WalkState) -> Geometry:
    _require_dim(a, 1, "tensor_join")
    _require_dim(b, 1, "tensor_join")
    if a.geometry.size != b.geometry.size:
        raise DomainError(
            f"cycle lengths differ: {a.geometry.size} vs {b.geometry.size}"
        )
    return Geometry(2, a.geometry.size)


def _product(a: WalkState, b: WalkState) -> np.ndarray:
    """Raw (x, y, J_A, J_B) tensor of a (x) b."""
    return np.einsum("xi,yj->xyij", a.by_node, b.by_node)


def tensor_join(a: WalkState, b: WalkState) -> WalkState:
    g = _pair_geometry(a, b)
    return WalkState.from_vector(g, _product(a, b))


def _swap_full_tensor(t: np.ndarray) -> np.ndarray:
    return t.transpose(1, 0, 3, 2)


def antisymmetrize(a: WalkState, b: WalkState, sign: int = -1) -> WalkState:
    """Normalized ``a (x) b + sign * b (x) a``.

    ``sign=-1`` (the default) gives the fermionic state; ``sign=+1`` the
    symmetric entangled state, which carries no avoidance property.
    The difference is formed as ``P - swap(P)`` so the antisymmetry holds
    bit-exactly.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    g = _pair_geometry(a, b)
    if sign == -1:
        va, vb = a.amps, b.amps
        resid = vb - (np.vdot(va, vb) / np.vdot(va, va)) * va
        if np.linalg.norm(resid) < ZERO_TOL * max(np.linalg.norm(vb), 1.0):
            raise DomainError("states are parallel; their antisymmetric part vanishes")
    p = _product(a, b)
    return WalkState.from_vector(g, p + sign * _swap_full_tensor(p))


def mirror_1d(s: WalkState, x_star: int) -> WalkState:
    """Reflect about internal node ``x_star``: (x, J) <- (2 x* - x, swap(J))."""
    _require_dim(s, 1, "mirror_1d")
    g = s.geometry
    g.validate((x_star,))
    src = (2 * x_star - np.arange(g.size)) % g.size
    t = s.tensor[src][:, ::-1]
    return WalkState(g, t, prenorm=s.prenorm)


def joint_mirror(s: WalkState, x_star: int) -> WalkState:
    """Both players' factors mirrored about ``x_star``."""
    _require_dim(s, 2, "joint_mirror")
    g = s.geometry
    g.validate((x_star, x_star))
    src = (2 * x_star - np.arange(g.size)) % g.size
    t = s.tensor.reshape(g.size, g.size, 2, 2)
    t = t[src][:, src][:, :, ::-1, ::-1]
    return WalkState(g, t, prenorm=s.prenorm)


def mirrored_antisymmetric(a: WalkState, b: WalkState, x_star: int) -> WalkState:
    """Normalized ``a(x)b - b(x)a + â(x)b̂ - b̂(x)â`` with mirrors about ``x_star``."""
    g = _pair_geometry(a, b)
    ah, bh = mirror_1d(a, x_star), mirror_1d(b, x_star)
    p = _product(a, b) + _product(ah, bh)
    phi = p - _swap_full_tensor(p)
    if np.linalg.norm(phi) < ZERO_TOL:
        raise DomainError("mirrored antisymmetric combination cancels to zero")
    return WalkState.from_vector(g, phi)


def swap_positions(s: WalkState) -> WalkState:
    """(U Φ)(x, y) = Φ(y, x) with channel components untouched."""
    _require_dim(s, 2, "swap_positions")
    return WalkState(s.geometry, s.tensor.transpose(1, 0, 2), prenorm=s.prenorm)


def swap_full(s: WalkState) -> WalkState:
    """Φ((x, μ), (y, ν)) -> Φ((y, ν), (x, μ))."""
    _require_dim(s, 2, "swap_full")
    n = s.geometry.size
    t = s.tensor.reshape(n, n, 2, 2)
    return WalkState(s.geometry, _swap_full_tensor(t), prenorm=s.prenorm)
