import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascade_blockage import (AnalyticSolver, BeamConfig, InvalidParameters,
                              JointLTEvaluator, ModelParams, NegligibleConditioningEvent,
                              best_beam_coverage, box_lt, conditional_switch_coverage,
                              half_plane_lt_finite, random_beam_coverage, shared_depth,
                              total_lt)
from oracles import enumerated_joint_lt

V = math.pi / 2


def P(**kw):
    base = dict(lam=0.1, base_radius=1.0, p=0.5, K=0.1, stages=5, variant="basic")
    base.update(kw)
    return ModelParams(**base)


def test_beam_config():
    assert BeamConfig(3).gain == 8.0
    assert BeamConfig(0).n_beams == 1
    assert BeamConfig(2).beam_of(math.pi) == 2
    assert BeamConfig(2, gain=3.0).gain == 3.0
    with pytest.raises(InvalidParameters):
        BeamConfig(-1)
    with pytest.raises(InvalidParameters):
        BeamConfig(1, gain=0.0)


@pytest.mark.parametrize("l1, l2, k, depth", [
    (1, 2, 4, 3), (1, 3, 4, 2), (1, 5, 4, 1), (1, 9, 4, 0), (7, 7, 4, 4), (3, 4, 2, 1),
])
def test_shared_depth(l1, l2, k, depth):
    assert shared_depth(l1, l2, k) == depth
    assert shared_depth(l2, l1, k) == depth


def test_shared_depth_rejects_bad_index():
    with pytest.raises(ValueError):
        shared_depth(0, 1, 2)
    with pytest.raises(ValueError):
        shared_depth(1, 5, 2)


@pytest.mark.parametrize("k, N", [(1, 3), (2, 3), (3, 3), (2, 4)])
def test_joint_lt_matches_tree_enumeration(k, N):
    rng = np.random.default_rng(k * 10 + N)
    params = P(lam=0.6, p=0.35, K=0.2, stages=N)
    ev = JointLTEvaluator(params, BeamConfig(k))
    for _ in range(3):
        s = rng.uniform(0, 4, 2 ** k)
        s[rng.random(2 ** k) < 0.3] = 0.0
        expected = enumerated_joint_lt("basic", 0.6, 1.0, 0.35, 0.2, N, list(s))
        assert ev.joint_lt(s) == pytest.approx(expected, rel=1e-12)


def test_h_base_at_k1_is_half_plane():
    params = P(stages=6)
    ev = JointLTEvaluator(params, BeamConfig(1))
    for s in (0.0, 0.5, 3.0):
        assert ev.h_base(s) == pytest.approx(half_plane_lt_finite(s, params), rel=1e-14)
        assert ev.h_level(1, [s]) == pytest.approx(half_plane_lt_finite(s, params), rel=1e-14)


def test_h_base_is_stage_transform():
    params = P(stages=6)
    ev = JointLTEvaluator(params, BeamConfig(3))
    solver = AnalyticSolver(params)
    assert ev.h_base(1.7) == solver.stage_lt(3, 1.7)
    assert ev.h_level(3, [1.7]) == pytest.approx(solver.stage_lt(3, 1.7), rel=1e-14)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_equal_arguments_aggregate(k):
    params = P()
    ev = JointLTEvaluator(params, BeamConfig(k))
    for s in (0.2, 1.0, 7.0):
        assert ev.joint_lt([s] * 2 ** k) == pytest.approx(total_lt(s, params), rel=1e-12)


def test_zero_arguments():
    ev = JointLTEvaluator(P(), BeamConfig(3))
    assert ev.joint_lt([0.0] * 8) == 1.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 20.0), min_size=8, max_size=8), st.integers(0, 2))
def test_symmetry_under_subtree_swap(args, level):
    # swapping the two children of any cone leaves the transform unchanged
    ev = JointLTEvaluator(P(p=0.3, K=0.2), BeamConfig(3))
    block = 8 >> level
    swapped = list(args)
    half = block // 2
    swapped[:block] = args[half:block] + args[:half]
    assert ev.joint_lt(swapped) == pytest.approx(ev.joint_lt(args), rel=1e-12)


def test_masked_matches_general():
    params = P(p=0.4, K=0.05)
    ev = JointLTEvaluator(params, BeamConfig(3))
    plain = JointLTEvaluator(params, BeamConfig(3), memoize=False)
    for mask in (1, 5, 0b10110011, 255):
        vec = [0.8 if mask >> i & 1 else 0.0 for i in range(8)]
        assert ev.masked_joint_lt(0.8, mask) == pytest.approx(plain._h_general(1, tuple(vec[:4]))
                                                             * plain._h_general(1, tuple(vec[4:])),
                                                             rel=1e-13)


def test_arity_and_domain_errors():
    ev = JointLTEvaluator(P(), BeamConfig(2))
    with pytest.raises(ValueError):
        ev.joint_lt([1.0, 1.0])
    with pytest.raises(ValueError):
        ev.joint_lt([1.0, -1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        ev.h_level(1, [1.0])
    with pytest.raises(ValueError):
        ev.h_level(3, [1.0])


def test_configuration_errors():
    with pytest.raises(InvalidParameters):
        JointLTEvaluator(P(variant="less_correlated"), BeamConfig(1))
    with pytest.raises(InvalidParameters):
        JointLTEvaluator(P(stages=2), BeamConfig(3))
    with pytest.raises(InvalidParameters, match="max_k"):
        best_beam_coverage(1.0, P(stages=6), BeamConfig(5))


def test_best_beam_closed_form():
    # p = 1, K = 0: only the first box of each half-plane is visible
    a = box_lt(0.5, V, 0.1)
    expected = 1 - (1 - a) ** 2
    assert expected == pytest.approx(0.9973977030260777, rel=1e-14)
    assert best_beam_coverage(1.0, P(p=1.0, K=0.0), BeamConfig(1)) == pytest.approx(expected,
                                                                                   rel=1e-13)
    assert random_beam_coverage(1.0, P(p=1.0, K=0.0), BeamConfig(1)) == pytest.approx(a, rel=1e-13)


def test_best_beam_k0_is_omnidirectional():
    params = P()
    for theta in (0.1, 1.0, 10.0):
        assert best_beam_coverage(theta, params, BeamConfig(0)) == pytest.approx(
            total_lt(theta, params), rel=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_best_beam_dominates_random(k):
    theta = 10 ** (np.arange(-10, 31, 5) / 10)
    best = best_beam_coverage(theta, P(), BeamConfig(k))
    rand = random_beam_coverage(theta, P(), BeamConfig(k))
    assert np.all(best >= rand - 1e-12)
    assert np.all((best > -1e-12) & (best < 1 + 1e-12))
    assert np.all(np.diff(best) <= 1e-12)


def test_best_beam_inclusion_exclusion_by_enumeration():
    # k = 2, N = 3: compare with the enumerated joint transforms on every subset
    params = P(lam=0.5, stages=3, p=0.4, K=0.2)
    theta = 2.0
    c = theta / 4
    expected = 0.0
    for size in range(1, 5):
        for subset in itertools.combinations(range(4), size):
            vec = [c if i in subset else 0.0 for i in range(4)]
            expected += (-1) ** (size + 1) * enumerated_joint_lt("basic", 0.5, 1.0, 0.4, 0.2, 3, vec)
    assert best_beam_coverage(theta, params, BeamConfig(2)) == pytest.approx(expected, rel=1e-12)


def test_conditional_self_switch():
    ev = JointLTEvaluator(P(), BeamConfig(2))
    assert ev.conditional_switch_coverage(1.0, 1, 1) == pytest.approx(1.0, rel=1e-14)
    assert ev.conditional_given_outage(1.0, 1, 1) == pytest.approx(0.0, abs=1e-14)


def test_conditional_depends_only_on_shared_depth():
    params = P()
    ev = JointLTEvaluator(params, BeamConfig(4))
    by_depth = {}
    for target in range(1, 17):
        d = shared_depth(1, target, 4)
        value = ev.conditional_switch_coverage(1.0, target)
        by_depth.setdefault(d, []).append(value)
    for values in by_depth.values():
        assert max(values) - min(values) < 1e-12
    # opposite half-planes are independent
    assert by_depth[0][0] == pytest.approx(ev.random_beam_coverage(1.0), rel=1e-12)
    means = [by_depth[d][0] for d in (4, 3, 2, 1, 0)]
    assert all(a > b for a, b in zip(means[1:], means[2:]))


def test_conditional_given_outage_below_marginal():
    ev = JointLTEvaluator(P(), BeamConfig(3))
    marginal = ev.random_beam_coverage(1.0)
    for target in range(2, 9):
        value = ev.conditional_given_outage(1.0, target)
        assert 0 <= value <= marginal + 1e-12
    assert ev.conditional_given_outage(1.0, 5) == pytest.approx(marginal, rel=1e-12)


def test_conditional_module_wrapper_and_errors():
    params = P()
    ev = JointLTEvaluator(params, BeamConfig(2))
    assert conditional_switch_coverage(1.0, params, BeamConfig(2), 2) == ev.conditional_switch_coverage(1.0, 2)
    with pytest.raises(ValueError):
        ev.conditional_switch_coverage(1.0, 5)
    dense = JointLTEvaluator(P(lam=1e3, p=0.0), BeamConfig(1))
    with pytest.raises(NegligibleConditioningEvent):
        dense.conditional_switch_coverage(1e6, 2)


def test_best_beam_matches_explicit_subset_sum():
    ev = JointLTEvaluator(P(lam=1.0), BeamConfig(4))
    c = 10.0 / 16
    terms = [(-1) ** (bin(mask).count("1") + 1) * ev.masked_joint_lt(c, mask)
             for mask in range(1, 2 ** 16)]
    assert ev.best_beam_coverage(10.0) == pytest.approx(math.fsum(terms), abs=1e-13)
