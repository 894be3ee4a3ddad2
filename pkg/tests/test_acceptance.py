"""End-to-end acceptance criteria, each at its stated tolerance."""

import time

import numpy as np

from toruswalk import analysis, coins, lattice
from toruswalk.lattice import Geometry
from toruswalk.operators import (
    fermion_obstruction_witness,
    iter_states,
    joint_mirror_operator,
    materialize_dense,
    position_swap_operator,
    random_product_field,
    step,
    symmetry_residual,
    tensor_evolution_fields,
)
from toruswalk.state import antisymmetrize, basis_state, class_pure_inner, mirrored_antisymmetric, position_distribution
from toruswalk.verify import oracle_fields, reference_configurations, random_state

N2 = 11
HM = np.array([[1, 1], [-1, 1]]) / np.sqrt(2)
BAL = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2


def players(n=N2):
    g1 = Geometry(1, n)
    a = basis_state(g1, g1.from_labels(2), np.array([1, 1j]) / np.sqrt(2))
    b = basis_state(g1, g1.from_labels(8), np.array([1j, 1]) / np.sqrt(2))
    return a, b


def test_c01_2d_complete_avoidance():
    g = Geometry(2, N2)
    t0 = time.perf_counter()
    f = coins.build_reflection_field(g)
    s0 = basis_state(g, g.from_labels((2, 8)), np.array([1j, 1, -1, 1j]) / 2)
    d = analysis.average_distribution(s0, f, 200)
    elapsed = time.perf_counter() - t0
    assert analysis.conflict_probability(d) == 0.0
    assert np.all(d.probs[lattice.conflict_mask(g).reshape(g.shape)] == 0.0)
    assert abs(d.total() - 1) <= 1e-9
    assert elapsed < 1.0


def test_c02_3d_split_reachability():
    g = Geometry(3, 5)
    t0 = time.perf_counter()
    f = coins.build_reflection_field(g)
    cmask = lattice.conflict_mask(g).reshape(g.shape)
    supports = []
    for labels in ((1, 2, 3), (3, 2, 1)):
        v = g.from_labels(labels)
        s0 = basis_state(g, v, class_pure_inner(g, v))
        d = analysis.average_distribution(s0, f, 200)
        assert np.count_nonzero(cmask) == 65
        assert np.all(d.probs[cmask] == 0.0)
        live = (d.probs > 1e-12) & ~cmask
        assert np.count_nonzero(live) == 30
        supports.append(live)
    assert not np.any(supports[0] & supports[1])
    assert np.count_nonzero(supports[0] | supports[1]) == 60
    assert time.perf_counter() - t0 < 5.0


def test_c03_3d_full_coverage():
    g = Geometry(3, 5)
    f = coins.build_reflection_field(g)
    s0 = analysis.seed_superposition(f)
    per_node = np.sqrt(np.sum(np.abs(s0.by_node) ** 2, axis=1))
    seeded = per_node[per_node > 0]
    assert seeded.size == 2
    np.testing.assert_allclose(seeded, 1 / np.sqrt(2), atol=1e-15)
    d = analysis.average_distribution(s0, f, 200)
    cmask = lattice.conflict_mask(g).reshape(g.shape)
    assert np.all(d.probs[~cmask] > 1e-12)
    assert np.count_nonzero(~cmask) == 60
    assert np.all(d.probs[cmask] == 0.0)


def test_c04_table_reproduction():
    t0 = time.perf_counter()
    for n in range(5, 13):
        rep = analysis.node_subnetworks(coins.build_reflection_field(Geometry(3, n)))
        exp = analysis.closed_form_sizes(n)
        assert rep.match is True
        assert rep.sizes("non-conflict") == sorted(exp["non_conflict"], reverse=True)
        assert rep.sizes("conflict") == sorted(exp["conflict"], reverse=True)
        if n % 2:
            h = n * (n - 1) * (n - 2) // 2
            assert sorted(rep.sizes()) == sorted([h, h, 3 * n * n - 2 * n])
        else:
            assert len(rep.components) == 9
    assert time.perf_counter() - t0 < 10.0


def test_c05_difference_group_consistency():
    assert len(lattice.group_transitions()) == 7
    for n in range(5, 10):
        groups = analysis.group_subnetworks(n)
        nodes = analysis.node_subnetworks(coins.build_reflection_field(Geometry(3, n)))
        assert sorted(c.size * n for c in groups.components) == sorted(nodes.sizes())


def test_c06_fermionic_partial_avoidance():
    a, b = players()
    f = tensor_evolution_fields(HM, HM, N2)
    s0 = antisymmetrize(a, b)
    acc_diag = np.zeros((N2, 4))
    acc_pos = np.zeros((N2, N2))
    worst_amp = 0.0
    for t, s in enumerate(iter_states(s0, f, 200)):
        if t == 200:
            break
        ten = s.amps.reshape(N2, N2, 2, 2)
        diag = np.einsum("xxmn->xmn", ten).reshape(N2, 4)
        # same channel on both walkers: mu == nu
        same = diag[:, [0, 3]]
        worst_amp = max(worst_amp, float(np.max(np.abs(same))))
        acc_diag[:, [0, 3]] += np.abs(same) ** 2
        acc_pos += position_distribution(s)
    avg_diag = acc_diag / 200
    avg_pos = acc_pos / 200
    assert worst_amp <= 1e-12
    assert np.max(avg_diag) <= 1e-24
    assert np.trace(avg_pos) > 0


def test_c07_mirrored_state_zero():
    a, b = players()
    f = tensor_evolution_fields(BAL, BAL, N2)
    g = f.geometry
    s0 = mirrored_antisymmetric(a, b, 0)
    worst = max(float(position_distribution(s)[0, 0]) for s in iter_states(s0, f, 200))
    assert worst <= 1e-24
    assert symmetry_residual(f, joint_mirror_operator(g, 0)) <= 1e-12


def test_c08_conflict_node_partial_avoidance():
    g = Geometry(2, N2)
    f = coins.build_conflict_node_field(g)
    s0 = basis_state(g, g.from_labels((2, 8)), np.array([1j, 1, -1, 1j]) / 2)
    d = analysis.average_distribution(s0, f, 200)
    cm = lattice.conflict_mask(g).reshape(g.shape)
    vals = d.probs[cm]
    assert vals.size == N2
    assert np.all(vals > 0)
    assert np.all(vals < 1 / N2**2)


def test_c09_impossibility_obstruction():
    rng = np.random.default_rng(2024)
    g = Geometry(2, 3)
    swap = position_swap_operator(g)
    for _ in range(50):
        f = random_product_field(3, rng)
        assert symmetry_residual(f, swap) > 1e-3
        for x in range(3):
            w = fermion_obstruction_witness(f.coin((x, x)))
            assert w.verdict == "unsatisfiable"
            assert w.forced_gram_defect > 1e-10
            assert abs(w.forced_determinant) <= 1e-12


def test_c10_oracle_equivalence():
    rng = np.random.default_rng(99)
    fields = oracle_fields()
    for scheme in ("hadamard_product", "reflection", "conflict_node", "fermionic_pair", "mirrored_pair"):
        assert any(k.startswith(scheme) for k in fields)
    for name, f in fields.items():
        assert f.geometry.state_length <= 1024
        assert f.max_unitarity_residual() <= 1e-10
        w = materialize_dense(f)
        for _ in range(20):
            s = random_state(f.geometry, rng)
            assert np.max(np.abs(w @ s.amps - step(s, f).amps)) <= 1e-12, name
    for f, s0 in reference_configurations().values():
        for s in iter_states(s0, f, 200):
            pass
        assert abs(s.norm() - 1) <= 1e-9
