from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np
import pytest

from lindborel.freq_diophantine import mode_scale
from lindborel.lindstedt_recursion import solve_up_to
from lindborel.tree_engine import (DecoratedTree, PropagatorTable, Ring, SelfEnergyClusters, TreeEnumerator,
                                   TruncationExceeded, approximant_h, assign_scales_and_clusters, build_M,
                                   dressed_propagator, enumerate_trees, flatten, formal_series, is_self_energy,
                                   reexpand_in_eps, symmetry_weight, tree_value)
from lindborel.tree_engine.clusters import Cluster

SUPPORT = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]


# --- brute-force oracle for the formal family --------------------------


def _compositions(n):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


def _shapes(n):
    """Plane trees with n nodes as nested tuples of child shapes."""
    if n == 1:
        yield ()
        return
    for comp in _compositions(n - 1):
        yield from itertools.product(*[list(_shapes(c)) for c in comp])


def _label(shape, modes):
    it = iter(modes)

    def go(s):
        return next(it), [go(c) for c in s]

    return go(shape)


def _info(t):
    mode, kids = t
    mom, order, ok = mode, 0, True
    child_moms = []
    for c in kids:
        cm, co, cok = _info(c)
        child_moms.append(cm)
        mom = (mom[0] + cm[0], mom[1] + cm[1])
        order += co
        ok &= cok
    if mode == (0, 0) and (not kids or (len(kids) == 1 and child_moms[0] == (0, 0))):
        ok = False
    return mom, order + (mom != (0, 0)), ok


def _brute_counts(k, max_nodes):
    by_size = Counter()
    by_mom = Counter()
    for n in range(1, max_nodes + 1):
        for s in _shapes(n):
            for modes in itertools.product(SUPPORT, repeat=n):
                mom, order, ok = _info(_label(s, modes))
                if ok and order == k:
                    by_mom[mom] += 1
                    by_size[n] += 1
    return by_mom, by_size


def test_formal_counts_match_brute_force(golden):
    assert sorted(golden.node_table) == sorted(SUPPORT)
    by_mom, by_size = _brute_counts(2, 6)
    # no order-2 tree has six nodes, so the cap is not binding
    assert by_size[6] == 0
    en = TreeEnumerator(golden, "formal")
    got = {nu: len(ts) for nu, ts in en.subtrees(2).items()}
    assert got == dict(by_mom)
    assert sum(got.values()) == 104
    assert sum(len(v) for v in en.subtrees(1).values()) == 8


def test_momentum_outside_support_sum_is_empty(golden):
    assert list(enumerate_trees(golden, 2, nu=(3, 0))) == []
    assert list(enumerate_trees(golden, 1, nu=(1, 1))) == []


def test_single_node_value(golden):
    (leaf,) = TreeEnumerator(golden, "formal").trees(1, (1, 0))
    assert leaf.p == 0 and leaf.order == 1
    assert np.allclose(tree_value(leaf, golden), [0.5j, 0, 0.5j])
    # at finite eta the bare value carries one power of eps
    assert np.allclose(tree_value(leaf, golden, eta=0.1), [0.005j, 0, 0.005j])


def test_zero_momentum_propagator(golden):
    G = golden.g_minus1
    assert np.allclose(G[:2, :], 0) and np.allclose(G[:, :2], 0)
    assert G[2, 2] == pytest.approx(1.0 / golden.M0[0, 0])


def test_flatten_conserves_momentum(golden):
    en = TreeEnumerator(golden, "formal")
    for t in en.trees(3)[:500]:
        flat = flatten(t, 0)
        assert flat.check_conservation()
        assert flat.number == list(range(1, flat.n_lines + 1))
        assert set(flat.to_json()) == {"modes", "parent", "momentum", "scale", "number", "root_gamma"}


def test_symmetry_weight(golden):
    en = TreeEnumerator(golden, "formal")
    for t in en.trees(2):
        expected = 1.0
        for v in t.walk():
            expected /= math.factorial(v.p)
        assert symmetry_weight(t) == expected


def test_formal_sum_matches_recursion_low_order(golden):
    H = solve_up_to(golden, 3)
    F = formal_series(golden, 3)
    for k in range(1, 4):
        assert (F.orders[k] - H.h.orders[k]).max_abs() < 1e-13 * H.h.orders[k].max_abs()


# --- clusters ----------------------------------------------------------


def _planted_tree():
    # leaf (-1,0) under (0,1) under (1,0) under (-1,0): lines (-1,0), (-1,1), (0,1), (-1,1)
    modes = [(-1, 0), (1, 0), (0, 1), (-1, 0)]
    parent = [-1, 0, 1, 2]
    children = [[1], [2], [3], []]
    momentum = [(-1, 1), (0, 1), (-1, 1), (-1, 0)]
    return DecoratedTree(modes, parent, momentum, [0] * 4, [1, 2, 3, 4], None, children)


def test_planted_two_scale_clusters(artificial, freq):
    theta = _planted_tree()
    assert theta.check_conservation()
    dec = assign_scales_and_clusters(theta, artificial, freq)
    assert theta.scale == [2, 1, 2, 0]
    scales = sorted(c.scale for c in dec.clusters)
    assert scales == [0, 1, 2]
    assert dec.depth() == 2
    (se,) = dec.self_energies()
    assert se.scale == 1 and se.lines == {1} and se.entering == (2,) and se.exiting == 0


def test_is_self_energy_cases(artificial, freq):
    theta = _planted_tree()
    assign_scales_and_clusters(theta, artificial, freq)
    c = Cluster(1, frozenset({1}), frozenset({0, 1}), (2,), 0)
    assert is_self_energy(c, theta)
    # two entering lines
    assert not is_self_energy(Cluster(1, frozenset({1}), frozenset({0, 1}), (2, 3), 0), theta)
    # no exiting line
    assert not is_self_energy(Cluster(1, frozenset({1}), frozenset({0, 1}), (2,), None), theta)
    # unequal momenta
    theta.momentum[0] = (0, 1)
    assert not is_self_energy(c, theta)
    # zero momentum on the path
    theta.momentum[0] = (-1, 1)
    theta.momentum[1] = (0, 0)
    assert not is_self_energy(c, theta)


def _has_one_child_zero_node(flat):
    return any(m == (0, 0) and len(ch) == 1 for m, ch in zip(flat.modes, flat.children))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_resummed_family_is_formal_without_self_energies(golden, artificial, freq, k):
    res = TreeEnumerator(golden, "resummed", artificial)
    form = TreeEnumerator(golden, "formal", artificial)
    n_res = 0
    for t in res.trees(k):
        flat = flatten(t)
        assert not assign_scales_and_clusters(flat, artificial, freq).self_energies()
        n_res += 1
    n_kept, n_se = 0, 0
    for t in form.trees(k):
        flat = flatten(t)
        if _has_one_child_zero_node(flat):
            continue
        if assign_scales_and_clusters(flat, artificial, freq).self_energies():
            n_se += 1
        else:
            n_kept += 1
    assert n_kept == n_res
    if k >= 3:
        assert n_se > 0


# --- self-energies and propagators -------------------------------------


def test_M_at_scale_zero_is_eps_M0(golden, artificial):
    for nu in [(1, 0), (0, 1), (-1, 1), (2, -3)]:
        eta = 0.1
        M = build_M(golden, artificial, nu, eta, n=0)
        assert np.array_equal(M, eta * eta * golden.M0_full)


def test_truncation_below_two_rejected(golden, artificial):
    with pytest.raises(TruncationExceeded):
        PropagatorTable(golden, artificial, Ring.numeric(0.1), "A", K_se=1)


def test_alpha_block_of_scale_zero_propagator(golden, artificial):
    eta = 0.1
    x = float(golden.omega @ np.array([-1.0, 1.0]))
    g = dressed_propagator(golden, artificial, (-1, 1), eta, n=0)
    assert np.allclose(g[:2, :2], eta**2 / x**2 * np.eye(2))
    assert np.allclose(g[:2, 2:], 0) and np.allclose(g[2:, :2], 0)
    assert g[2, 2] == pytest.approx(eta**2 / (x**2 + eta**2 * golden.M0[0, 0]))


def test_scheme_B_fixed_point_equals_scheme_A(golden, artificial):
    A = PropagatorTable(golden, artificial, Ring.numeric(0.1), "A", 3)
    B = PropagatorTable(golden, artificial, Ring.numeric(0.1), "B", 3)
    for nu in [(0, 1), (-1, 1), (-1, 2), (2, -3), (3, -5)]:
        d = B.depth(nu)
        assert d <= max(mode_scale(golden.freq, artificial, nu), 0)
        assert np.allclose(B.M_step(nu, d), B.M_step(nu, d + 1), rtol=1e-14, atol=1e-300)
        assert np.allclose(B.M(nu), A.M(nu), rtol=1e-13, atol=1e-18)


def test_propagator_reality_and_symmetry(golden, artificial):
    for nu in [(0, 1), (-1, 1), (2, -3)]:
        g = dressed_propagator(golden, artificial, nu, 0.1)
        gm = dressed_propagator(golden, artificial, tuple(-v for v in nu), 0.1)
        assert np.allclose(g, np.conj(gm), rtol=1e-13, atol=1e-18)
        assert np.allclose(g, g.T, rtol=1e-13, atol=1e-18)


def test_cluster_counts_grow(golden, artificial):
    se = SelfEnergyClusters(golden, artificial)
    counts = [se.count((-1, 1), 1, j) for j in (1, 2)]
    assert 0 < counts[0] < counts[1]
    assert se.count((1, 0), -1, 2) == 0


@pytest.mark.parametrize("scheme", ["A", "B"])
def test_reexpansion_matches_recursion(golden, artificial, scheme):
    H = solve_up_to(golden, 3)
    R = reexpand_in_eps(golden, artificial, 3, scheme)
    for k in range(1, 4):
        assert (R.orders[k] - H.h.orders[k]).max_abs() < 1e-12 * H.h.orders[k].max_abs()


def test_approximant_close_to_series(golden, seq12, recursion6):
    # dressed sum of trees of order <= 3 differs from the eps^3 partial sum at eta^8
    diffs = []
    for eta in (0.05, 0.025):
        poly, samples = approximant_h(golden, seq12, 3, 6, eta, grid=8)
        ref = recursion6.h.orders[0]
        for k in range(1, 4):
            ref = ref + recursion6.h.orders[k].scale(eta ** (2 * k))
        diffs.append((poly - ref).wiener_norm())
        assert samples.shape == (8, 8, 3)
    assert diffs[0] / diffs[1] > 2**7


def test_approximant_rejects_bad_arguments(golden, seq12):
    with pytest.raises(ValueError):
        approximant_h(golden, seq12, 0, 3, 0.1)
