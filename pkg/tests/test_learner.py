import json

import numpy as np
import pytest

from hiercode import gf
from hiercode.learner import (
    LearnerConfig,
    Overflow,
    RidgeLearner,
    SyntheticLearner,
    TaskDataset,
    dequantize,
    from_field,
    load_datasets,
    quantize,
    ridge_global,
    ridge_gradient,
    ridge_gradient_float,
    ridge_loss_float,
    to_field,
)

S = 2.0**-16


def random_instance(seed, points=6, dim=3):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, (points, dim))
    y = rng.uniform(-2, 2, points)
    w = rng.uniform(-1, 1, dim)
    return X, y, w


def central_difference(X, y, w, h=1e-5):
    out = np.zeros_like(w)
    for j in range(w.size):
        e = np.zeros_like(w)
        e[j] = h
        out[j] = (ridge_loss_float(X, y, w + e) - ridge_loss_float(X, y, w - e)) / (2 * h)
    return out


def test_quantize_round_trip():
    q = quantize([1.5, -0.25, 0.0, -3.0])
    assert q.tolist() == [3 * 2**15, -(2**14), 0, -3 * 2**16]
    assert dequantize(q).tolist() == [1.5, -0.25, 0.0, -3.0]


def test_quantize_ties_away_from_zero():
    half_unit = 2.0**-17
    assert quantize([half_unit, -half_unit]).tolist() == [1, -1]


def test_field_embedding_is_twos_complement():
    f = to_field([-1, 0, 5])
    assert f.tolist() == [gf.P - 1, 0, 5]
    assert from_field(f).tolist() == [-1, 0, 5]


def test_field_embedding_rejects_overflow():
    with pytest.raises(Overflow):
        to_field([gf.P // 2 + 1])


def test_trivial_gradient():
    # one point x=1, y=1, w=0: gradient is x (x w - y) = -1
    data = TaskDataset.from_real([[1.0]], [1.0])
    assert dequantize(ridge_gradient(data, quantize([0.0]))).tolist() == [-1.0]


def test_float_gradient_against_finite_differences():
    for seed in range(100):
        X, y, w = random_instance(seed)
        g = ridge_gradient_float(X, y, w)
        fd = central_difference(X, y, w)
        assert np.allclose(g, fd, rtol=1e-6, atol=1e-9), seed


def test_fixed_point_gradient_within_quantization_bound():
    for seed in range(100):
        X, y, w = random_instance(seed)
        data = TaskDataset.from_real(X, y)
        wq = quantize(w)
        fixed = dequantize(ridge_gradient(data, wq))
        # oracle runs on the already-quantised inputs, so only arithmetic rounding remains
        exact = ridge_gradient_float(dequantize(data.X), dequantize(data.y), dequantize(wq))
        bound = S * (1 + np.abs(dequantize(data.X)).max())
        assert np.abs(fixed - exact).max() <= bound, seed


def _config(lam1, lam2, K, omega=None):
    return LearnerConfig.from_real(lam1, lam2, 0.5, np.eye(K) if omega is None else omega)


def test_identity_correlation_matches_merged_ridge():
    rng = np.random.default_rng(0)
    K, m = 4, 3
    V = quantize(rng.uniform(-1, 1, (m, K)))
    W = quantize(rng.uniform(-1, 1, (m, K)))
    coupled = ridge_global(V, W, _config(0.25, 0.125, K))
    merged = ridge_global(V, W, _config(0.0, 0.375, K))
    assert np.array_equal(coupled, merged)


def test_decoupled_update_ignores_other_tasks():
    rng = np.random.default_rng(1)
    K, m = 5, 2
    omega = np.eye(K) + 0.1 * (np.ones((K, K)) - np.eye(K))
    cfg = _config(0.0, 0.05, K, omega)
    V = quantize(rng.uniform(-1, 1, (m, K)))
    W = quantize(rng.uniform(-1, 1, (m, K)))
    base = ridge_global(V, W, cfg)
    V2, W2 = V.copy(), W.copy()
    perm = [0, 3, 1, 4, 2]
    V2[:, 1:] = V[:, perm[1:]]
    W2[:, 1:] = W[:, perm[1:]]
    assert np.array_equal(ridge_global(V2, W2, cfg)[:, 0], base[:, 0])


def test_coupling_moves_neighbours():
    rng = np.random.default_rng(2)
    K, m = 3, 2
    omega = np.array([[1.0, -0.5, 0.0], [-0.5, 1.0, 0.0], [0.0, 0.0, 1.0]])
    cfg = _config(0.5, 0.0, K, omega)
    V = quantize(np.zeros((m, K)))
    W = quantize(rng.uniform(-1, 1, (m, K)))
    W2 = W.copy()
    W2[:, 1] = quantize(rng.uniform(-1, 1, m))
    a, b = ridge_global(V, W, cfg), ridge_global(V, W2, cfg)
    assert not np.array_equal(a[:, 0], b[:, 0])
    assert np.array_equal(a[:, 2], b[:, 2])


def test_global_update_matches_float_reference():
    rng = np.random.default_rng(3)
    K, m = 4, 3
    omega = np.eye(K) - 0.25 * (np.roll(np.eye(K), 1, 0) + np.roll(np.eye(K), -1, 0))
    lam1, lam2, eta = 0.1, 0.01, 0.5
    V = quantize(rng.uniform(-1, 1, (m, K)))
    W = quantize(rng.uniform(-1, 1, (m, K)))
    fixed = dequantize(ridge_global(V, W, LearnerConfig.from_real(lam1, lam2, eta, omega)))
    Vf, Wf = dequantize(V), dequantize(W)
    ref = Wf - eta * (Vf + lam1 * Wf @ omega + lam2 * Wf)
    assert np.abs(fixed - ref).max() <= S


def test_asymmetric_omega_rejected():
    with pytest.raises(ValueError):
        LearnerConfig.from_real(0.1, 0.1, 0.5, [[1.0, 0.5], [0.0, 1.0]])


def test_dataset_shape_checks():
    with pytest.raises(ValueError):
        TaskDataset(quantize(np.ones((3, 2))), quantize(np.ones(2)))


def test_ridge_learner_is_deterministic():
    data = [TaskDataset.from_real([[1.0, 0.5], [0.2, -1.0]], [0.3, -0.4]) for _ in range(3)]
    learner = RidgeLearner(data, _config(0.1, 0.01, 3))
    W = learner.initial_model()
    ivs = {k: learner.local_update(k, W[:, k - 1], 0) for k in (1, 2, 3)}
    assert all(v.dtype == np.int64 and v.min() >= 0 and v.max() < gf.P for v in ivs.values())
    assert np.array_equal(learner.global_update(ivs, W), learner.global_update(dict(ivs), W.copy()))


def test_synthetic_learner_is_seeded():
    a, b = SyntheticLearner(4, 5, seed=9), SyntheticLearner(4, 5, seed=9)
    w = np.zeros(5, dtype=np.int64)
    assert np.array_equal(a.local_update(2, w, 3), b.local_update(2, w, 3))
    assert not np.array_equal(a.local_update(2, w, 3), a.local_update(2, w, 4))


def test_load_datasets(tmp_path):
    path = tmp_path / "tasks.json"
    path.write_text(json.dumps({"tasks": [{"X": [[1.0, 2.0]], "y": [0.5]}, {"X": [[0.0, 1.0]], "y": [1.0]}]}))
    data = load_datasets(path)
    assert len(data) == 2
    assert dequantize(data[0].X).tolist() == [[1.0, 2.0]]
