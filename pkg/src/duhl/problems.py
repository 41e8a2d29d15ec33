"""Objectives, primal-dual maps and coordinate-wise duality gaps.

Three families, all of the form ``O(alpha) = f(A alpha) + sum_i g_i(alpha_i)``:

* ridge:        (1/2d)||A alpha - b||^2 + (lam/2)||alpha||^2
* elastic net:  (1/2d)||A alpha - b||^2 + lam(eta/2 ||alpha||^2 + (1-eta)||alpha||_1)
  (``eta == 0`` is the Lasso; its gap uses a bounded-support L1 with radius B)
* dual SVM:     (1/n) sum_i -y_i alpha_i + (1/(2 lam n^2))||A alpha||^2,
  subject to y_i alpha_i in [0, 1]

The gap of coordinate ``i`` is evaluated from ``c_i = a_i^T w`` where ``w`` is
the family's dual point (``v - b`` for regression, ``v / (lam n)`` for SVM).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import CLASSIFICATION, REGRESSION, Dataset
from .exceptions import GapInconsistencyError
from .tolerances import TOL


class Family(str, enum.Enum):
    RIDGE = "ridge"
    ELASTIC_NET = "elastic-net"
    SVM = "svm"


@dataclass(frozen=True)
class ProblemSpec:
    family: Family
    lam: float
    eta: float
    L: float
    mu: float
    B: Optional[float]
    d: int
    n: int

    @classmethod
    def for_data(cls, family, data: Dataset, lam, eta=None) -> "ProblemSpec":
        family = Family(family)
        lam = float(lam)
        if not lam > 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        d, n = data.d, data.n
        if family is Family.SVM:
            if data.kind != CLASSIFICATION:
                raise ValueError("the SVM family needs a classification dataset")
            return cls(family, lam, 0.0, 1.0 / (lam * n * n), 0.0, 1.0, d, n)
        if data.kind != REGRESSION:
            raise ValueError(f"the {family.value} family needs a regression dataset")
        if family is Family.RIDGE:
            return cls(family, lam, 1.0, 1.0 / d, lam, None, d, n)
        eta = 0.0 if eta is None else float(eta)
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {eta}")
        B = lasso_B(data, lam) if eta == 0.0 else None
        return cls(family, lam, eta, 1.0 / d, lam * eta, B, d, n)

    @property
    def is_lasso(self) -> bool:
        return self.family is Family.ELASTIC_NET and self.eta == 0.0

    @property
    def strongly_convex(self) -> bool:
        return self.mu > 0.0


@dataclass
class TrainState:
    alpha: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, data: Dataset) -> "TrainState":
        return cls(np.zeros(data.n), np.zeros(data.d), 0)

    @classmethod
    def from_alpha(cls, data: Dataset, alpha, t=0) -> "TrainState":
        alpha = np.array(alpha, dtype=np.float64)
        return cls(alpha, data.A @ alpha, t)

    def resync(self, data: Dataset, tol=TOL.v_sync) -> bool:
        """Recompute ``v = A alpha`` if the incremental copy drifted. Returns True on resync."""
        exact = data.A @ self.alpha
        if np.max(np.abs(self.v - exact), initial=0.0) > tol * (1.0 + np.max(np.abs(self.v), initial=0.0)):
            self.v = exact
            return True
        return False


def lasso_B(data: Dataset, lam) -> float:
    """Bounded-support radius ``||b||^2 / (2 lam d)`` used by the Lasso gap."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if data.kind != REGRESSION:
        raise ValueError("lasso_B needs regression targets")
    b = data.labels
    B = float(b @ b) / (2.0 * lam * data.d)
    if B == 0.0:
        warnings.warn("b is zero: every Lasso iterate stays at 0", RuntimeWarning, stacklevel=2)
    return B


def lambda_max(data: Dataset) -> float:
    """Smallest lam for which the Lasso solution is exactly zero."""
    return float(np.max(np.abs(data.A.T @ data.labels))) / data.d


# --------------------------------------------------------------------------- #

def objective(p: ProblemSpec, data: Dataset, alpha, v=None) -> float:
    alpha = np.asarray(alpha, dtype=np.float64)
    if v is None:
        v = data.A @ alpha
    if p.family is Family.SVM:
        y = data.labels
        n = p.n
        return float(-(y @ alpha) / n + (v @ v) / (2.0 * p.lam * n * n))
    r = v - data.labels
    fit = (r @ r) / (2.0 * p.d)
    if p.family is Family.RIDGE:
        return float(fit + 0.5 * p.lam * (alpha @ alpha))
    reg = 0.5 * p.eta * (alpha @ alpha) + (1.0 - p.eta) * np.sum(np.abs(alpha))
    return float(fit + p.lam * reg)


def data_fit(p: ProblemSpec, data: Dataset, v) -> float:
    """The smooth part ``f(v)``."""
    if p.family is Family.SVM:
        return float(v @ v) / (2.0 * p.lam * p.n * p.n)
    r = v - data.labels
    return float(r @ r) / (2.0 * p.d)


def dual_map_w(p: ProblemSpec, data: Dataset, v) -> np.ndarray:
    if p.family is Family.SVM:
        return np.asarray(v) / (p.lam * p.n)
    return np.asarray(v) - data.labels


def _raw_gaps(p: ProblemSpec, alpha, c, y=None):
    """Unclamped gaps from ``alpha_i`` and ``c_i = a_i^T w`` (vectorized)."""
    lam = p.lam
    if p.family is Family.SVM:
        return (alpha * c + np.maximum(0.0, 1.0 - y * c) - y * alpha) / p.n
    d = p.d
    if p.family is Family.RIDGE:
        return (alpha * c + c * c / (2.0 * lam * d) + 0.5 * lam * d * alpha * alpha) / d
    if p.eta == 0.0:
        return (alpha * c + p.B * np.maximum(np.abs(c) - lam * d, 0.0) + lam * d * np.abs(alpha)) / d
    eta = p.eta
    excess = np.maximum(np.abs(c) - lam * d * (1.0 - eta), 0.0)
    return (
        alpha * c
        + lam * d * (0.5 * eta * alpha * alpha + (1.0 - eta) * np.abs(alpha))
        + excess * excess / (2.0 * lam * eta * d)
    ) / d


def _clamp(raw, where=None):
    bad = raw < -TOL.gap_clamp
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        label = k if where is None else int(where[k])
        raise GapInconsistencyError(
            f"coordinate {label} has gap {raw[k]:.3e} < -{TOL.gap_clamp:g}; dual point is stale"
        )
    return np.maximum(raw, 0.0)


def coord_gaps(p: ProblemSpec, data: Dataset, alpha, v, indices=None) -> np.ndarray:
    """Gaps for all coordinates (or ``indices``) sharing one evaluation of ``w``."""
    w = dual_map_w(p, data, v)
    alpha = np.asarray(alpha)
    y = data.labels if p.family is Family.SVM else None
    if indices is None:
        c = data.A.T @ w
        return _clamp(_raw_gaps(p, alpha, c, y))
    idx = np.asarray(indices, dtype=np.intp)
    c = data.A[:, idx].T @ w
    return _clamp(_raw_gaps(p, alpha[idx], c, None if y is None else y[idx]), idx)


def coord_gap(p: ProblemSpec, data: Dataset, i, alpha, w) -> float:
    """Gap of the single coordinate ``i`` given a precomputed dual point ``w``."""
    c = np.array([data.A[:, i] @ w])
    a = np.array([alpha[i]])
    y = None if p.family is not Family.SVM else np.array([data.labels[i]])
    return float(_clamp(_raw_gaps(p, a, c, y), [i])[0])


def total_gap(p: ProblemSpec, data: Dataset, alpha, v=None) -> float:
    if v is None:
        v = data.A @ np.asarray(alpha)
    return float(np.sum(coord_gaps(p, data, alpha, v)))


def coord_regularizer(p: ProblemSpec, alpha, y=None):
    """Elementwise ``g_i(alpha_i)`` (SVM box constraint assumed satisfied)."""
    alpha = np.asarray(alpha)
    if p.family is Family.SVM:
        return -y * alpha / p.n
    if p.family is Family.RIDGE:
        return 0.5 * p.lam * alpha * alpha
    return p.lam * (0.5 * p.eta * alpha * alpha + (1.0 - p.eta) * np.abs(alpha))
