import math

import numpy as np
import pytest

from tenscomp.datagen import SyntheticSpec, make_samples, random_mask, synthetic_map
from tenscomp.dr import SolverConfig
from tenscomp.problems import (Method, ProblemSpec, build_prox_list, complete,
                               evaluate_unsampled, nmse_db, nuclear_sum, objective_value,
                               tv1, tv2)
from tenscomp.samples import SampleSet


def test_prox_list_sizes():
    s = SampleSet.empty((3, 4, 2))
    assert len(build_prox_list(ProblemSpec("rank"), (3, 4, 2), s)) == 4
    assert len(build_prox_list(ProblemSpec("l2tv", [1, 1, 1]), (3, 4, 2), s)) == 7
    assert len(build_prox_list(ProblemSpec("l1tv", [1, 1, 1]), (3, 4, 2), s)) == 7


def test_prox_list_order():
    dims = (3, 4)
    rng = np.random.default_rng(0)
    s = SampleSet.from_tensor(rng.normal(size=dims), [0, 5])
    ops = build_prox_list(ProblemSpec("l2tv", [0.5, 0.2], heuristic=False), dims, s)
    x = rng.normal(size=dims)
    from tenscomp.prox import prox_data_fidelity, prox_l2tv, prox_nuclear
    np.testing.assert_array_equal(ops[0](x, 1.0), prox_l2tv(x, 0, 0.5, 1.0))
    np.testing.assert_array_equal(ops[1](x, 1.0), prox_l2tv(x, 1, 0.2, 1.0))
    np.testing.assert_array_equal(ops[2](x, 1.0), prox_nuclear(x, 0, 1.0))
    np.testing.assert_array_equal(ops[3](x, 1.0), prox_nuclear(x, 1, 1.0))
    np.testing.assert_array_equal(ops[4](x, 1.0, 3.0), prox_data_fidelity(x, s, 3.0, 1.0))


def test_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec("l1tv")
    with pytest.raises(ValueError):
        ProblemSpec("l2tv", [1.0, -1.0])
    with pytest.raises(ValueError):
        ProblemSpec("nope")
    with pytest.raises(ValueError):
        build_prox_list(ProblemSpec("l2tv", [1.0, 1.0]), (2, 2, 2), SampleSet.empty((2, 2, 2)))
    assert ProblemSpec("l1tv", [1.0], heuristic=True).heuristic is False
    assert ProblemSpec("rank").method is Method.RANK


def test_objective_zero():
    s = SampleSet.empty((3, 3))
    assert objective_value(ProblemSpec("rank"), np.zeros((3, 3)), s, 1.0) == 0.0


def test_objective_constant_tensor_has_no_tv():
    x = np.full((3, 4, 2), 2.0)
    s = SampleSet.empty(x.shape)
    spec = ProblemSpec("l2tv", [1.0, 2.0, 3.0])
    assert objective_value(spec, x, s, 5.0) == pytest.approx(nuclear_sum(x), rel=1e-14)
    # every unfolding of c*ones has one singular value c*sqrt(size)
    assert nuclear_sum(x) == pytest.approx(3 * 2.0 * math.sqrt(24), rel=1e-12)


def test_objective_small_example():
    # 1x2 tensor [0, 4]; mode-0 fibers have length 1, the mode-1 fiber gives |4 - 0|;
    # both unfoldings are a single vector of norm 4
    x = np.array([[0.0, 4.0]])
    s = SampleSet.empty(x.shape)
    tv_part = 1.0 * 0 + 1.0 * abs(4.0 - 0.0)
    nuc_part = np.linalg.svd(np.array([[0.0, 4.0]]), compute_uv=False).sum() + \
        np.linalg.svd(np.array([[0.0], [4.0]]), compute_uv=False).sum()
    assert tv_part + nuc_part == pytest.approx(12.0)
    assert objective_value(ProblemSpec("l1tv", [1.0, 1.0]), x, s, 0.0) == pytest.approx(12.0, rel=1e-14)


def test_objective_fidelity_term():
    x = np.zeros((2, 2))
    s = SampleSet(np.array([[0, 0], [1, 1]]), np.array([3.0, -1.0]), (2, 2))
    assert objective_value(ProblemSpec("rank"), x, s, 2.0) == pytest.approx(0.5 * 2 * 10)


def test_tv_definitions():
    x = np.array([[1.0, 3.0, 2.0], [0.0, 0.0, 5.0]])
    assert tv2(x, 1) == 4 + 1 + 0 + 25
    assert tv1(x, 1) == 2 + 1 + 0 + 5
    assert tv2(x, 0) == 1 + 9 + 9
    assert tv1(x, 0) == 1 + 3 + 3


def test_objective_transpose_invariance():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(4, 6))
    s = SampleSet.from_tensor(x + rng.normal(size=x.shape), [1, 7, 20])
    st = SampleSet(s.indices[:, ::-1], s.values, (6, 4))
    for method in ("l1tv", "l2tv"):
        a = objective_value(ProblemSpec(method, [0.3, 1.7]), x, s, 2.0)
        b = objective_value(ProblemSpec(method, [1.7, 0.3]), x.T, st, 2.0)
        assert a == pytest.approx(b, rel=1e-12)


def test_nmse_examples():
    truth = np.arange(1.0, 7.0).reshape(2, 3)
    mask = np.ones_like(truth, dtype=bool)
    assert nmse_db(truth, truth, mask) == -math.inf
    assert nmse_db(np.zeros_like(truth), truth, mask) == pytest.approx(0.0, abs=1e-14)
    t = np.array([[10.0]])
    assert nmse_db(np.array([[11.0]]), t, np.array([[0, 0]])) == pytest.approx(-20.0, abs=1e-12)


def test_nmse_errors():
    z = np.zeros((2, 2))
    with pytest.raises(ValueError, match="undefined"):
        nmse_db(np.ones((2, 2)), z, np.ones((2, 2), bool))
    with pytest.raises(ValueError, match="empty"):
        nmse_db(z, z, np.zeros((2, 2), bool))


def test_evaluate_unsampled_excludes_samples():
    truth = np.arange(1.0, 5.0).reshape(2, 2)
    s = SampleSet.from_tensor(truth, [0])
    est = truth.copy()
    est[0, 0] = 100.0  # error only at the sampled position
    assert evaluate_unsampled(est, truth, s) == -math.inf


FAST = SolverConfig(max_inner_iters=300)


def test_zero_alpha_tv_matches_rank():
    truth = synthetic_map(SyntheticSpec((8, 6, 3), rank=2, smoothness=2, noise_db=0.5, seed=5))
    s = make_samples(truth, random_mask(truth.shape, 0.3, 5))
    # tightly converged so both splittings land on the same minimizer
    cfg = SolverConfig(gamma=30, max_inner_iters=3000, inner_tol=1e-10, max_rounds=3)
    x_rank, _ = complete(ProblemSpec("rank", solver=cfg), s)
    x_tv, _ = complete(ProblemSpec("l2tv", [0, 0, 0], heuristic=False, solver=cfg), s)
    x_l1, _ = complete(ProblemSpec("l1tv", [0, 0, 0], solver=cfg), s)
    assert np.linalg.norm(x_tv - x_rank) / np.linalg.norm(x_rank) < 1e-6
    assert np.linalg.norm(x_l1 - x_tv) / np.linalg.norm(x_tv) < 1e-12


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_dropping_a_tv_weight_does_not_hurt_the_rest(seed):
    truth = synthetic_map(SyntheticSpec((10, 8, 3), rank=2, smoothness=2, noise_db=0.5, seed=seed))
    s = make_samples(truth, random_mask(truth.shape, 0.4, seed))
    cfg = SolverConfig(max_inner_iters=2000, inner_tol=1e-8, max_rounds=3)
    lam = cfg.lambdas()[-1]
    rest = ProblemSpec("rank")
    full, _ = complete(ProblemSpec("l2tv", [0.5, 0.5, 0.5], heuristic=False, solver=cfg), s)
    dropped, _ = complete(ProblemSpec("l2tv", [0.5, 0.0, 0.5], heuristic=False, solver=cfg), s)
    f_full = objective_value(rest, full, s, lam)
    f_dropped = objective_value(rest, dropped, s, lam)
    assert f_dropped <= f_full * (1 + 1e-4)
