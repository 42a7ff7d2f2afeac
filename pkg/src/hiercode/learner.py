"""Local/global update pairs for the multi-task training loop.

``RidgeLearner`` runs a gradient step on squared loss plus the regulariser
``lam1 * tr(W Omega W^T) + lam2 * ||W||_F^2`` entirely in fixed-point
integers, so every relay that applies the global update to the same IVs gets
a bit-identical model matrix. ``SyntheticLearner`` skips the maths and emits
seeded random field symbols with the same message sizes.

Fixed-point values carry ``scale_bits`` fractional bits and live in the field
as two's-complement residues: ``x`` maps to ``x mod P``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gf

SCALE_BITS = 16
LIMIT = gf.P // 2


class Overflow(ArithmeticError):
    pass


def _ints(a) -> np.ndarray:
    return np.asarray(a, dtype=object)


def quantize(x, scale_bits: int = SCALE_BITS) -> np.ndarray:
    """Round real values to the nearest fixed-point integer (ties away from zero)."""
    S = 1 << scale_bits
    flat = [int(Fraction(v) * S + (Fraction(1, 2) if v >= 0 else Fraction(-1, 2))) for v in np.ravel(x)]
    return np.array(flat, dtype=object).reshape(np.shape(x))


def dequantize(q, scale_bits: int = SCALE_BITS) -> np.ndarray:
    return np.asarray(q, dtype=object).astype(float) / (1 << scale_bits)


def _guard(q: np.ndarray, what: str) -> np.ndarray:
    if q.size and max(abs(int(v)) for v in q.ravel()) >= LIMIT:
        raise Overflow(f"{what} leaves the fixed-point range")
    return q


def to_field(q) -> np.ndarray:
    q = _guard(_ints(q), "value")
    return np.array([int(v) % gf.P for v in q.ravel()], dtype=np.int64).reshape(q.shape)


def from_field(f) -> np.ndarray:
    f = np.asarray(f, dtype=np.int64)
    return np.array([int(v) - gf.P if v > LIMIT else int(v) for v in f.ravel()], dtype=object).reshape(f.shape)


def _floordiv(a: np.ndarray, d: int) -> np.ndarray:
    return np.array([int(v) // d for v in a.ravel()], dtype=object).reshape(a.shape)


@dataclass(frozen=True)
class TaskDataset:
    X: np.ndarray  # (|B_k|, l) fixed-point
    y: np.ndarray  # (|B_k|,) fixed-point

    def __post_init__(self):
        if self.X.ndim != 2 or self.y.shape != (self.X.shape[0],):
            raise ValueError(f"inconsistent dataset shapes {self.X.shape} / {self.y.shape}")
        if self.X.shape[0] == 0:
            raise ValueError("empty dataset")

    @classmethod
    def from_real(cls, X, y, scale_bits: int = SCALE_BITS) -> TaskDataset:
        return cls(quantize(np.atleast_2d(X), scale_bits), quantize(np.ravel(y), scale_bits))


@dataclass(frozen=True)
class LearnerConfig:
    lam1: int
    lam2: int
    eta: int
    omega: np.ndarray  # (K, K) fixed-point, symmetric
    scale_bits: int = SCALE_BITS

    def __post_init__(self):
        om = _ints(self.omega)
        if om.ndim != 2 or om.shape[0] != om.shape[1] or not (om == om.T).all():
            raise ValueError("omega must be a symmetric square matrix")

    @classmethod
    def from_real(cls, lam1, lam2, eta, omega, scale_bits: int = SCALE_BITS) -> LearnerConfig:
        q = lambda v: int(quantize([v], scale_bits)[0])
        return cls(q(lam1), q(lam2), q(eta), quantize(np.asarray(omega, dtype=float), scale_bits), scale_bits)


def ridge_gradient(data: TaskDataset, w, scale_bits: int = SCALE_BITS) -> np.ndarray:
    """``(1/|B|) X^T (X w - y)`` in fixed point, floor-rounded."""
    S = 1 << scale_bits
    X, y, w = _ints(data.X), _ints(data.y), _ints(w)
    residual = _floordiv(X.dot(w), S) - y
    return _guard(_floordiv(X.T.dot(residual), S * X.shape[0]), "local update")


def ridge_gradient_float(X, y, w) -> np.ndarray:
    X, y, w = (np.asarray(a, dtype=float) for a in (X, y, w))
    return X.T @ (X @ w - y) / X.shape[0]


def ridge_loss_float(X, y, w) -> float:
    X, y, w = (np.asarray(a, dtype=float) for a in (X, y, w))
    r = X @ w - y
    return float(r @ r) / (2 * X.shape[0])


def ridge_global(V: np.ndarray, W: np.ndarray, config: LearnerConfig) -> np.ndarray:
    """``w_k - eta (v_k + lam1 (W Omega)_k + lam2 w_k)`` with a single final rounding.

    ``V`` and ``W`` are (m, K) fixed-point integer matrices, column ``k`` per task.
    """
    S = 1 << config.scale_bits
    V, W, om = _ints(V), _ints(W), _ints(config.omega)
    # everything at scale S^3 before the step size
    grad = V * S * S + config.lam1 * W.dot(om) + config.lam2 * W * S
    step = _floordiv(config.eta * grad, S * S * S)
    return _guard(W - step, "global update")


class RidgeLearner:
    """Ridge-regression tasks sharing a correlation-coupled regulariser."""

    name = "ridge"

    def __init__(self, datasets: Sequence[TaskDataset], config: LearnerConfig):
        self.datasets = list(datasets)
        self.config = config
        dims = {d.X.shape[1] for d in self.datasets}
        if len(dims) != 1:
            raise ValueError(f"tasks disagree on feature count: {sorted(dims)}")
        self.dim = dims.pop()
        if config.omega.shape != (len(self.datasets),) * 2:
            raise ValueError("omega must be K x K")

    @property
    def K(self) -> int:
        return len(self.datasets)

    def initial_model(self) -> np.ndarray:
        return np.zeros((self.dim, self.K), dtype=np.int64)

    def local_update(self, k: int, w_k: np.ndarray, iteration: int) -> np.ndarray:
        """IV of user ``k`` (1-based) as field symbols."""
        q = ridge_gradient(self.datasets[k - 1], from_field(w_k), self.config.scale_bits)
        return to_field(q)

    def global_update(self, ivs: dict[int, np.ndarray], W: np.ndarray) -> np.ndarray:
        V = np.column_stack([from_field(ivs[k]) for k in range(1, self.K + 1)])
        return to_field(ridge_global(V, from_field(W), self.config))


class SyntheticLearner:
    """Seeded random IVs and a coupled field-linear global update."""

    name = "synthetic"

    def __init__(self, K: int, dim: int, seed: int = 0):
        if dim <= 0:
            raise ValueError("IV length must be positive")
        self.K = K
        self.dim = dim
        self.seed = seed

    def initial_model(self) -> np.ndarray:
        return np.zeros((self.dim, self.K), dtype=np.int64)

    def local_update(self, k: int, w_k: np.ndarray, iteration: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, iteration, k])
        return (gf.random_matrix(rng, self.dim) + w_k) % gf.P

    def global_update(self, ivs: dict[int, np.ndarray], W: np.ndarray) -> np.ndarray:
        V = np.column_stack([ivs[k] for k in range(1, self.K + 1)])
        total = V.sum(axis=1, dtype=object) % gf.P
        mixed = (V + np.asarray(total, dtype=np.int64)[:, None]) % gf.P
        return (W + mixed) % gf.P


def random_ridge_problem(K: int, dim: int, points: int, seed: int, lam1: float = 0.1, lam2: float = 0.01,
                         eta: float = 0.5) -> RidgeLearner:
    """Small synthetic regression tasks with a ring-coupled correlation matrix."""
    rng = np.random.default_rng(seed)
    datasets = [TaskDataset.from_real(rng.uniform(-1, 1, (points, dim)), rng.uniform(-1, 1, points)) for _ in range(K)]
    omega = np.eye(K)
    for k in range(K):
        omega[k, (k + 1) % K] = omega[(k + 1) % K, k] = -0.25
    return RidgeLearner(datasets, LearnerConfig.from_real(lam1, lam2, eta, omega))


def load_datasets(path: str | Path, scale_bits: int = SCALE_BITS) -> list[TaskDataset]:
    """Read ``{"tasks": [{"X": [[...]], "y": [...]}, ...]}`` and quantise it."""
    with open(path) as fh:
        data = json.load(fh)
    return [TaskDataset.from_real(task["X"], task["y"], scale_bits) for task in data["tasks"]]
