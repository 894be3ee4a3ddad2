"""Self-check suite behind ``toruswalk verify``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analysis, coins
from .lattice import Geometry
from .operators import (
    CoinField,
    fermion_obstruction_witness,
    full_swap_operator,
    iter_states,
    joint_mirror_operator,
    materialize_dense,
    position_swap_operator,
    random_product_field,
    random_unitary,
    step,
    symmetry_residual,
    tensor_evolution_fields,
)
from .state import (
    WalkState,
    antisymmetrize,
    basis_state,
    mirrored_antisymmetric,
    position_distribution,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _reference_players(n: int = 11) -> tuple[WalkState, WalkState]:
    g1 = Geometry(1, n)
    a = basis_state(g1, (1,), np.array([1, 1j]) / np.sqrt(2))
    b = basis_state(g1, (7,), np.array([1j, 1]) / np.sqrt(2))
    return a, b


def reference_configurations() -> dict[str, tuple[CoinField, WalkState]]:
    """The evolution setups used in the reported simulations."""
    g2 = Geometry(2, 11)
    start2 = basis_state(g2, (1, 7), np.array([1j, 1, -1, 1j]) / 2)
    a, b = _reference_players()
    f3 = coins.build_reflection_field(Geometry(3, 5))
    hm, bal = coins.named_coin("hadamard_minus"), coins.named_coin("balanced_complex")
    return {
        "reflection_2d": (coins.build_reflection_field(g2), start2),
        "reflection_3d": (f3, analysis.seed_superposition(f3)),
        "conflict_node_2d": (coins.build_conflict_node_field(g2), start2),
        "fermionic_pair": (tensor_evolution_fields(hm, hm, 11), antisymmetrize(a, b)),
        "mirrored_pair": (tensor_evolution_fields(bal, bal, 11), mirrored_antisymmetric(a, b, 0)),
    }


def random_state(g: Geometry, rng: np.random.Generator) -> WalkState:
    v = rng.normal(size=g.state_length) + 1j * rng.normal(size=g.state_length)
    return WalkState.from_vector(g, v)


def oracle_fields() -> dict[str, CoinField]:
    """One field per scheme with state length <= 1024."""
    hm, bal = coins.named_coin("hadamard_minus"), coins.named_coin("balanced_complex")
    out = {
        "hadamard_product_1d": CoinField.uniform(Geometry(1, 11), hm),
        "hadamard_product_2d": CoinField.uniform(Geometry(2, 11), np.kron(hm, hm)),
        "hadamard_product_3d": CoinField.uniform(Geometry(3, 5), np.kron(np.kron(hm, hm), hm)),
        "reflection_2d": coins.build_reflection_field(Geometry(2, 11)),
        "reflection_3d": coins.build_reflection_field(Geometry(3, 5)),
        "conflict_node_2d": coins.build_conflict_node_field(Geometry(2, 11)),
        "fermionic_pair": tensor_evolution_fields(hm, hm, 11),
        "mirrored_pair": tensor_evolution_fields(bal, bal, 11),
    }
    return out


def check_norm() -> CheckResult:
    worst = 0.0
    for f, s0 in reference_configurations().values():
        for s in iter_states(s0, f, 200):
            pass
        worst = max(worst, abs(s.norm() - 1))
    return CheckResult("norm_conservation", worst <= 1e-9, f"max drift after 200 steps {worst:.3e}")


def check_oracle(fields: dict[str, CoinField] | None = None, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for f in (fields or oracle_fields()).values():
        w = materialize_dense(f)
        for _ in range(20):
            s = random_state(f.geometry, rng)
            worst = max(worst, float(np.max(np.abs(w @ s.amps - step(s, f).amps))))
    return CheckResult("oracle_equivalence", worst <= 1e-12, f"max |W s - step(s)| = {worst:.3e}")


def check_unitarity(fields: dict[str, CoinField] | None = None) -> CheckResult:
    worst = max(f.max_unitarity_residual() for f in (fields or oracle_fields()).values())
    return CheckResult("coin_unitarity", worst <= 1e-10, f"max residual {worst:.3e}")


def check_antisymmetry() -> CheckResult:
    f, s0 = reference_configurations()["fermionic_pair"]
    n = f.geometry.size
    worst_sym = worst_diag = 0.0
    for s in iter_states(s0, f, 200):
        t = s.tensor.reshape(n, n, 2, 2)
        worst_sym = max(worst_sym, float(np.max(np.abs(t + t.transpose(1, 0, 3, 2)))))
        d = t[np.arange(n), np.arange(n)][:, [0, 1], [0, 1]]
        worst_diag = max(worst_diag, float(np.max(np.abs(d))))
    ok = worst_sym <= 1e-10 and worst_diag <= 1e-12
    return CheckResult(
        "antisymmetry_persistence", ok, f"max |Φ + swapΦ| {worst_sym:.3e}, max diagonal amplitude {worst_diag:.3e}"
    )


def check_mirror_zero() -> CheckResult:
    f, s0 = reference_configurations()["mirrored_pair"]
    worst = max(float(position_distribution(s)[0, 0]) for s in iter_states(s0, f, 200))
    resid = symmetry_residual(f, joint_mirror_operator(f.geometry, 0))
    ok = worst <= 1e-24 and resid <= 1e-12
    return CheckResult("mirror_zero_persistence", ok, f"max p(1,1) {worst:.3e}, mirror residual {resid:.3e}")


def check_obstruction(seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    g = Geometry(2, 3)
    swap = position_swap_operator(g)
    min_resid = min(symmetry_residual(random_product_field(3, rng), swap) for _ in range(50))
    verdicts = {fermion_obstruction_witness(random_unitary(4, rng)).verdict for _ in range(50)}
    full = symmetry_residual(tensor_evolution_fields(*(2 * [coins.named_coin("hadamard_minus")]), 3), full_swap_operator(g))
    ok = min_resid > 1e-3 and verdicts == {"unsatisfiable"} and full <= 1e-12
    return CheckResult(
        "obstruction_witness",
        ok,
        f"min position-swap residual {min_resid:.3e}; witness {sorted(verdicts)}; full-swap residual {full:.1e}",
    )


def check_table(ns=range(5, 13)) -> CheckResult:
    bad = [n for n in ns if not analysis.node_subnetworks(coins.build_reflection_field(Geometry(3, n))).match]
    return CheckResult("subnetwork_table", not bad, "all match" if not bad else f"mismatch for N={bad}")


def check_reflection_2d() -> CheckResult:
    f, s0 = reference_configurations()["reflection_2d"]
    d = analysis.average_distribution(s0, f, 200)
    cp = analysis.conflict_probability(d)
    return CheckResult("reflection_2d_avoidance", cp == 0.0, f"conflict probability {cp!r}")


def check_threads() -> CheckResult:
    from .operators import apply_coins

    f, s0 = reference_configurations()["reflection_3d"]
    a = apply_coins(f.coins, s0.by_node, threads=0)
    b = apply_coins(f.coins, s0.by_node, threads=4)
    same = np.array_equal(a.view(np.float64), b.view(np.float64))
    return CheckResult("thread_determinism", bool(same), "bitwise identical" if same else "results differ")


CHECKS: list[Callable[[], CheckResult]] = [
    check_norm,
    check_oracle,
    check_unitarity,
    check_antisymmetry,
    check_mirror_zero,
    check_obstruction,
    check_table,
    check_reflection_2d,
    check_threads,
]


def run_all(extra: dict[str, CoinField] | None = None) -> list[CheckResult]:
    results = [chk() for chk in CHECKS]
    if extra:
        small = {k: f for k, f in extra.items() if f.geometry.state_length <= 1024}
        results.append(check_unitarity(extra))
        if small:
            results.append(check_oracle(small))
    return results
