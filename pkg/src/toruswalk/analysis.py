"""
Time-averaged distributions, conflict metrics and network decomposition.

A reflection coin field splits the torus into subnetworks: amplitude that
arrives at a node from a neighbor of the same class stays among nodes of
that class forever. Subnetworks are computed three ways:

* :func:`node_subnetworks` takes connected components of the node graph
  induced by structural nonzeros of the coins,
* :func:`reachable_nodes` runs a directed search over (node, channel) states,
* :func:`group_subnetworks` works on difference groups only (D=3),

and :func:`closed_form_sizes` gives the expected sizes.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import lattice
from .errors import DomainError
from .lattice import DifferenceGroup, Geometry, conflict_mask, neighbor_ranks
from .operators import CoinField, iter_states
from .state import NORM_TOL, WalkState, class_pure_inner, position_distribution

POSITIVE_TOL = 1e-12
DEFAULT_STEPS = 200


@dataclass(frozen=True, eq=False)
class AverageDistribution:
    geometry: Geometry
    steps: int
    probs: np.ndarray  # shape (N,)*D

    def total(self) -> float:
        return float(self.probs.sum())

    def nonzero_count(self, tol: float = POSITIVE_TOL) -> int:
        return int(np.count_nonzero(self.probs > tol))


def average_distribution(
    s0: WalkState,
    f: CoinField,
    steps: int = DEFAULT_STEPS,
    visit: Callable[[int, np.ndarray], None] | None = None,
) -> AverageDistribution:
    """Mean of the position distributions at t = 0, ..., steps - 1.

    ``visit(t, p_t)`` is called with every instantaneous distribution.
    """
    if steps < 1:
        raise DomainError("averaging needs at least one step")
    acc = np.zeros(s0.geometry.shape)
    for t, s in enumerate(iter_states(s0, f, steps - 1)):
        p = position_distribution(s)
        if visit is not None:
            visit(t, p)
        acc += p
    avg = acc / steps
    if abs(avg.sum() - 1.0) > NORM_TOL:
        from .errors import InvariantError

        raise InvariantError(f"average distribution sums to {avg.sum():.17g}")
    return AverageDistribution(s0.geometry, steps, avg)


def conflict_probability_of(g: Geometry, probs: np.ndarray) -> float:
    if g.dim == 1:
        raise DomainError("conflicts need at least two players (D >= 2)")
    return float(np.asarray(probs).reshape(-1)[conflict_mask(g)].sum())


def conflict_probability(d: AverageDistribution) -> float:
    return conflict_probability_of(d.geometry, d.probs)


# ---------------------------------------------------------------------------
# subnetwork reports

@dataclass(frozen=True)
class Component:
    members: tuple  # nodes (internal coords) or difference groups (l, m)
    klass: str  # "conflict" | "non-conflict" | "mixed"
    node_count: int

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def representative(self):
        return self.members[0]


@dataclass(frozen=True)
class SubnetworkReport:
    level: str  # "node" | "group"
    n: int
    dim: int
    components: list[Component]
    expected: dict | None = None
    match: bool | None = None
    warning: str | None = None

    def sizes(self, klass: str | None = None) -> list[int]:
        """Node counts per component, descending."""
        return sorted(
            (c.node_count for c in self.components if klass is None or c.klass == klass),
            reverse=True,
        )

    def to_json_dict(self) -> dict:
        def rep(c):
            r = c.representative
            if self.level == "node":
                return [x + 1 for x in r]
            return list(DifferenceGroup(*r).label(self.n))

        return {
            "level": self.level,
            "n": self.n,
            "dim": self.dim,
            "components": [
                {
                    "size": c.node_count,
                    "groups": c.size if self.level == "group" else None,
                    "class": c.klass,
                    "representative": rep(c),
                }
                for c in self.components
            ],
            "expected": self.expected,
            "match": self.match,
            "warning": self.warning,
        }


def _klass(flags: np.ndarray) -> str:
    if flags.all():
        return "conflict"
    if not flags.any():
        return "non-conflict"
    return "mixed"


def pure_input_table(g: Geometry) -> np.ndarray:
    """pure[u, c]: channel c at u is fed by a neighbor of u's own class."""
    conflict = conflict_mask(g)
    src, _ = neighbor_ranks(g)
    return conflict[src] == conflict[:, None]


def support_edges(f: CoinField) -> tuple[np.ndarray, np.ndarray]:
    """Directed node edges (u, w) along which same-class amplitude can move.

    u -> u - e(r) is an edge when some channel c of u fed by a same-class
    neighbor has a structurally nonzero coin entry C_u[r, c].
    """
    g = f.geometry
    pure = pure_input_table(g)
    live = np.any(f.support & pure[:, None, :], axis=2)
    _, dst = neighbor_ranks(g)
    u, r = np.nonzero(live)
    return u, dst[u, r]


def _expected_for(g: Geometry) -> tuple[dict | None, str | None]:
    if g.dim != 3:
        return None, None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        exp = closed_form_sizes(g.size)
    warn = str(caught[0].message) if caught else None
    return exp, warn


def _compare(exp: dict | None, rep_sizes: dict[str, list[int]]) -> bool | None:
    if exp is None:
        return None
    return (
        sorted(x for x in exp["non_conflict"] if x) == sorted(rep_sizes["non-conflict"])
        and sorted(x for x in exp["conflict"] if x) == sorted(rep_sizes["conflict"])
        and not rep_sizes["mixed"]
    )


def node_subnetworks(f: CoinField) -> SubnetworkReport:
    g = f.geometry
    u, w = support_edges(f)
    m = g.num_nodes
    adj = coo_matrix((np.ones(u.size), (u, w)), shape=(m, m))
    _, labels = connected_components(adj, directed=False)
    conflict = conflict_mask(g)
    first_seen: dict[int, int] = {}
    for r, lab in enumerate(labels):
        first_seen.setdefault(int(lab), r)
    comps = []
    for lab, _ in sorted(first_seen.items(), key=lambda kv: kv[1]):
        ranks = np.flatnonzero(labels == lab)
        comps.append(
            Component(tuple(g.node(int(r)) for r in ranks), _klass(conflict[ranks]), ranks.size)
        )
    exp, warn = _expected_for(g)
    report = SubnetworkReport("node", g.size, g.dim, comps, exp, None, warn)
    sizes = {k: report.sizes(k) for k in ("conflict", "non-conflict", "mixed")}
    return SubnetworkReport("node", g.size, g.dim, comps, exp, _compare(exp, sizes), warn)


def reachable_nodes(f: CoinField, start, channels: Iterable[int] | None = None) -> set[tuple[int, ...]]:
    """Nodes visited by amplitude started at ``start`` in ``channels``.

    Breadth-first search over (node, channel) states using the structural
    nonzeros of the coins; ``channels`` defaults to those of ``start`` fed
    by same-class neighbors.
    """
    g = f.geometry
    start = g.validate(start)
    if channels is None:
        channels = lattice.pure_channels(g, start) if g.dim > 1 else range(g.num_channels)
    _, dst = neighbor_ranks(g)
    support = f.support
    s0 = g.rank(start)
    seen = {(s0, c) for c in channels}
    queue = deque(seen)
    while queue:
        u, c = queue.popleft()
        for r in np.flatnonzero(support[u, :, c]):
            nxt = (int(dst[u, r]), int(r))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return {g.node(u) for u, _ in seen} if seen else set()


def group_subnetworks(n: int) -> SubnetworkReport:
    """Components of the difference-group graph for a 3-player torus."""
    if n < 3:
        raise DomainError("cycle length must be >= 3")
    shifts = lattice.group_transitions()
    cls = {
        (l, m): lattice.is_conflict_group(n, DifferenceGroup(l, m))
        for l in range(n)
        for m in range(n)
    }
    seen: set[tuple[int, int]] = set()
    comps = []
    for root in sorted(cls):
        if root in seen:
            continue
        members = [root]
        seen.add(root)
        queue = deque([root])
        while queue:
            l, m = queue.popleft()
            for dl, dm in shifts:
                nb = ((l + dl) % n, (m + dm) % n)
                if nb not in seen and cls[nb] == cls[root]:
                    seen.add(nb)
                    members.append(nb)
                    queue.append(nb)
        comps.append(
            Component(tuple(sorted(members)), "conflict" if cls[root] else "non-conflict", len(members) * n)
        )
    exp, warn = _expected_for(Geometry(3, n))
    report = SubnetworkReport("group", n, 3, comps, exp, None, warn)
    sizes = {k: report.sizes(k) for k in ("conflict", "non-conflict", "mixed")}
    return SubnetworkReport("group", n, 3, comps, exp, _compare(exp, sizes), warn)


def closed_form_sizes(n: int) -> dict:
    """Expected subnetwork node counts on the 3-player torus."""
    if n < 5:
        warnings.warn(f"N={n} is below the validated range N >= 5", stacklevel=2)
    if n % 2:
        half = n * (n - 1) * (n - 2) // 2
        non_conflict = [half, half]
        conflict = [3 * n * n - 2 * n]
    else:
        non_conflict = [n * (n - 2) * (n - 4) // 8] * 2 + [n**3 // 4 - n**2 // 2] * 3
        conflict = [3 * n * n // 2 - 2 * n] + [n * n // 2] * 3
    return {
        "n": n,
        "parity": "odd" if n % 2 else "even",
        "non_conflict": non_conflict,
        "conflict": conflict,
        "total_non_conflict": n * (n - 1) * (n - 2),
        "total_conflict": 3 * n * n - 2 * n,
        "validated": n >= 5,
    }


def seed_superposition(f: CoinField, report: SubnetworkReport | None = None) -> WalkState:
    """Equal superposition over one node per non-conflict subnetwork.

    Each seed is the lexicographically smallest node of its component, with
    a uniform inner state over the channels fed by same-class neighbors.
    """
    g = f.geometry
    report = report or node_subnetworks(f)
    seeds = [c.representative for c in report.components if c.klass == "non-conflict"]
    if not seeds:
        raise DomainError("field has no non-conflict subnetwork")
    amps = np.zeros((g.num_nodes, g.num_channels), dtype=np.complex128)
    for v in seeds:
        amps[g.rank(v)] = class_pure_inner(g, v) / np.sqrt(len(seeds))
    return WalkState.from_vector(g, amps)
