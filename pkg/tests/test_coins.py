import numpy as np
import pytest

from toruswalk import analysis, coins, lattice
from toruswalk.coins import BlockLibrary, Relabeling
from toruswalk.errors import DomainError
from toruswalk.lattice import DifferenceGroup, Geometry, channel_code
from toruswalk.operators import CoinField, unitarity_residual

S2 = np.sqrt(2)

PATTERN_123 = """\
* 0 * 0 * * * *
* 0 * 0 * * * *
* 0 * 0 * * * *
* 0 * 0 * * * *
0 * 0 * 0 0 0 0
* 0 * 0 * * * *
0 * 0 * 0 0 0 0
* 0 * 0 * * * *"""


def test_named_constants():
    np.testing.assert_array_equal(coins.named_coin("hadamard_minus"), np.array([[1, 1], [-1, 1]]) / S2)
    hm = coins.named_coin("hadamard_minus")
    np.testing.assert_array_equal(coins.named_coin("coin_2d_bulk"), np.kron(hm, hm))
    expected = np.array([[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, -1, 0], [1, 0, 0, -1]]) / S2
    np.testing.assert_array_equal(coins.named_coin("coin_conflict_node_4x4"), expected)
    np.testing.assert_array_equal(
        coins.named_coin("balanced_complex"), np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2
    )
    with pytest.raises(DomainError):
        coins.named_coin("nope")


@pytest.mark.parametrize("name", [n for n in coins.coin_names() if n not in ("coin_2d_above", "coin_2d_below")])
def test_named_unitary(name):
    assert unitarity_residual(coins.named_coin(name)) <= 1e-10


def test_named_returns_copy():
    m = coins.named_coin("U2")
    m[0, 0] = 99
    assert coins.named_coin("U2")[0, 0] != 99


def test_transcribed_border_coins():
    above = coins.named_coin("coin_2d_above")
    np.testing.assert_array_equal(above[0], [0, 0, 0, 1])
    np.testing.assert_array_equal(above[:, 3], [1, 0, 0, 0])
    below = coins.named_coin("coin_2d_below")
    np.testing.assert_array_equal(below[3], [1, 0, 0, 0])
    # as given, one pair of columns has inner product i
    for m, (a, b) in ((above, (1, 2)), (below, (2, 3))):
        gram = m.conj().T @ m
        assert gram[a, b] == pytest.approx(1j, abs=1e-15)
        assert unitarity_residual(m) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("side", ["above", "below"])
def test_repaired_border_coins(side):
    literal = coins.named_coin(f"coin_2d_{side}")
    fixed = coins.named_coin(f"coin_2d_{side}_unitary")
    assert unitarity_residual(fixed) <= 1e-10
    diff = np.argwhere(literal != fixed)
    assert len(diff) == 1
    r, c = diff[0]
    assert fixed[r, c] == -literal[r, c]
    np.testing.assert_array_equal(literal == 0, fixed == 0)


def test_mask_border_pattern():
    g = Geometry(3, 5)
    m = coins.reflection_mask(g, g.from_labels((1, 2, 3)))
    assert m.grid() == PATTERN_123
    assert m.k == 2


def test_mask_bulk_all_free():
    g = Geometry(2, 11)
    m = coins.reflection_mask(g, g.from_labels((4, 7)))
    assert m.allowed.all()
    assert set(m.grid().split()) == {"*"}


def test_mask_2d_example():
    g = Geometry(2, 11)
    m = coins.reflection_mask(g, g.from_labels((4, 6)))
    c = {n: channel_code(n) for n in ("LL", "LR", "RL", "RR")}
    expected = np.zeros((4, 4), bool)
    expected[c["RL"], c["LR"]] = True
    for r in ("LL", "LR", "RR"):
        for col in ("LL", "RL", "RR"):
            expected[c[r], c[col]] = True
    np.testing.assert_array_equal(m.allowed, expected)
    with pytest.raises(DomainError):
        coins.reflection_mask(Geometry(1, 5), (0,))


def test_build_bulk_is_u8():
    g = Geometry(3, 9)
    v = (0, 3, 6)
    assert coins.reflection_mask(g, v).k == 0
    np.testing.assert_array_equal(coins.build_reflection_coin(g, v), coins.named_coin("U8"))
    f = coins.build_reflection_field(g)
    np.testing.assert_array_equal(f.coin(v), coins.named_coin("U8"))


def test_build_border_blocks():
    g = Geometry(3, 5)
    v = g.from_labels((1, 2, 3))
    c = coins.build_reflection_coin(g, v)
    m = coins.reflection_mask(g, v)
    assert np.all(c[~m.allowed] == 0.0)
    rows = [channel_code("RLL"), channel_code("RRL")]
    cols = [channel_code("LLR"), channel_code("LRR")]
    np.testing.assert_array_equal(c[np.ix_(rows, cols)], coins.named_coin("U2"))
    other_r = [r for r in range(8) if r not in rows]
    other_c = [x for x in range(8) if x not in cols]
    np.testing.assert_array_equal(c[np.ix_(other_r, other_c)], coins.named_coin("U6"))


def test_missing_block_size():
    g = Geometry(3, 5)
    lib = BlockLibrary({8: coins.named_coin("U8")})
    with pytest.raises(DomainError):
        coins.build_reflection_coin(g, g.from_labels((1, 2, 3)), lib)
    with pytest.raises(DomainError):
        BlockLibrary({2: np.ones((2, 2))})


def test_default_library_sizes():
    lib = coins.default_library()
    for size in range(1, 9):
        assert lib[size].shape == (size, size)
        assert unitarity_residual(lib[size]) <= 1e-10
    np.testing.assert_allclose(lib[3], np.fft.fft(np.eye(3)) / np.sqrt(3), atol=1e-15)


@pytest.mark.parametrize("dim,ns", [(2, range(3, 10)), (3, range(3, 10))])
def test_every_coin_compliant_and_unitary(dim, ns):
    for n in ns:
        g = Geometry(dim, n)
        f = coins.build_reflection_field(g)
        assert coins.is_mask_compliant(f)
        assert f.max_unitarity_residual() <= 1e-10
        for v in g.nodes():
            m = coins.reflection_mask(g, v)
            assert int(m.dest_conflict.sum()) == m.k


def test_observed_block_sizes_3d():
    ks = set()
    for n in range(5, 10):
        g = Geometry(3, n)
        ks |= {coins.reflection_mask(g, v).k for v in g.nodes()}
    assert ks <= {0, 2, 4, 6, 8}
    assert {2, 4, 6} <= ks


@pytest.mark.parametrize("dim,n", [(2, 5), (2, 8), (3, 5), (3, 6)])
def test_no_cross_class_edges(dim, n):
    """Exhaustive edge scan of W's nonzero structure."""
    g = Geometry(dim, n)
    f = coins.build_reflection_field(g)
    conflict = lattice.conflict_mask(g)
    src, dst = lattice.neighbor_ranks(g)
    for u in range(g.num_nodes):
        for c in range(g.num_channels):
            cls_in = conflict[src[u, c]]
            for r in np.flatnonzero(f.coins[u][:, c]):
                assert conflict[dst[u, r]] == cls_in


def test_bfs_2d_never_reaches_diagonal():
    g = Geometry(2, 11)
    f = coins.build_reflection_field(g)
    reach = analysis.reachable_nodes(f, g.from_labels((2, 8)), channels=range(4))
    assert not any(lattice.is_conflict_node(g, v) for v in reach)
    assert len(reach) == 110


def test_bfs_3d_halves():
    g = Geometry(3, 5)
    f = coins.build_reflection_field(g)
    a = analysis.reachable_nodes(f, g.from_labels((1, 2, 3)))
    b = analysis.reachable_nodes(f, g.from_labels((3, 2, 1)))
    assert len(a) == len(b) == 30
    assert not a & b
    assert not any(lattice.is_conflict_node(g, v) for v in a | b)


def test_conflict_node_field():
    g = Geometry(2, 11)
    f = coins.build_conflict_node_field(g)
    np.testing.assert_array_equal(f.coin(g.from_labels((3, 3))), coins.named_coin("coin_conflict_node_4x4"))
    h = np.array([[1, 1], [1, -1]]) / S2
    np.testing.assert_allclose(f.coin((0, 5)), np.kron(h, h), atol=0)
    assert f.max_unitarity_residual() <= 1e-10
    with pytest.raises(DomainError):
        coins.build_conflict_node_field(Geometry(3, 5))


@pytest.mark.parametrize("n", range(5, 10))
def test_twelve_coin_groups(n):
    g = Geometry(3, n)
    groups = coins.enumerate_coin_groups(g)
    expected_border = 7 if n == 6 else 12
    assert len(groups) == expected_border
    with_bulk = coins.enumerate_coin_groups(g, include_bulk=True)
    # bulk nodes need every pairwise circular distance >= 2: first at N=7
    has_bulk = n >= 7
    assert ("1" * 64 in with_bulk) == has_bulk
    assert len(with_bulk) == expected_border + has_bulk


def test_coin_group_shared_by_difference_group():
    n = 7
    g = Geometry(3, n)
    for l in range(n):
        for m in range(n):
            sigs = {coins.coin_group_of(g, v) for v in lattice.group_members(n, DifferenceGroup(l, m))}
            assert len(sigs) == 1
    with pytest.raises(DomainError):
        coins.coin_group_of(Geometry(2, 5), (0, 1))


def test_relabeling_permutations():
    ident = Relabeling(False, False, False)
    assert ident.permutation() == [0, 1, 2, 3]
    assert Relabeling(True, False, False).permutation() == [2, 3, 0, 1]
    assert Relabeling(False, False, True).permutation() == [0, 2, 1, 3]
    m = np.arange(16).reshape(4, 4)
    np.testing.assert_array_equal(ident.apply(m), m)


def test_adapter_report():
    rep = coins.adapt_border_coins(11)
    assert rep.literal_unitarity_residual == pytest.approx(1.0, abs=1e-12)
    assert rep.unadapted_fits is False
    assert rep.fits
    g = Geometry(2, 11)
    above_node = (0, 2) if rep.above_offset == 2 else (0, 9)
    below_node = (0, 9) if rep.above_offset == 2 else (0, 2)
    assert coins.satisfies_mask(rep.above, coins.reflection_mask(g, above_node))
    assert coins.satisfies_mask(rep.below, coins.reflection_mask(g, below_node))
    for rl, off in rep.candidates:
        assert off in (2, -2)
        assert coins.satisfies_mask(rl.apply(coins.named_coin("coin_2d_above_unitary")),
                                    coins.reflection_mask(g, (0, 2) if off == 2 else (0, 9)))


def test_adapted_field_avoids_conflicts():
    rep = coins.adapt_border_coins(11)
    g = Geometry(2, 11)
    bulk = coins.named_coin("coin_2d_bulk")

    def coin(v):
        d = (v[1] - v[0]) % 11
        if d == (2 if rep.above_offset == 2 else 9):
            return rep.above
        if d == (9 if rep.above_offset == 2 else 2):
            return rep.below
        return bulk

    f = CoinField.from_function(g, coin)
    reach = analysis.reachable_nodes(f, g.from_labels((2, 8)), channels=range(4))
    assert not any(lattice.is_conflict_node(g, v) for v in reach)
