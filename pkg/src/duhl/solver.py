"""Block updates on the fast unit: randomized coordinate sweeps over ``A[:, P]``.

The solver sees only the block's columns, the shared vector ``v = A alpha``
and the block's current coefficients.  Regression families keep a local copy
of ``v - b``; the SVM keeps a local copy of ``v``.  For the quadratic ``f``
implemented here, minimizing the true objective over the block is the same
problem as the linearized local subproblem, so the sweeps work on it directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .data import Dataset
from .problems import Family, ProblemSpec, TrainState, coord_regularizer
from .tolerances import TOL


@dataclass(frozen=True)
class SolverBudget:
    passes: int
    seed: int = 0

    def __post_init__(self):
        if int(self.passes) < 1:
            raise ValueError(f"passes must be >= 1, got {self.passes}")


@dataclass(frozen=True, eq=False)
class LocalBlockView:
    block: np.ndarray
    columns: np.ndarray
    norms: np.ndarray
    v_snapshot: np.ndarray
    alpha_snapshot: np.ndarray
    targets: Optional[np.ndarray] = None   # b, regression only
    labels: Optional[np.ndarray] = None    # y[P], SVM only

    @classmethod
    def from_state(cls, data: Dataset, state: TrainState, block, norms=None) -> "LocalBlockView":
        idx = np.asarray(block, dtype=np.intp)
        if idx.size == 0:
            raise ValueError("block must be nonempty")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("block indices must be unique and sorted ascending")
        cols = np.asfortranarray(data.A[:, idx])
        nrm = np.einsum("ij,ij->j", cols, cols) if norms is None else np.asarray(norms)[idx]
        classification = data.kind == "classification"
        return cls(
            block=idx,
            columns=cols,
            norms=np.ascontiguousarray(nrm, dtype=np.float64),
            v_snapshot=np.array(state.v, dtype=np.float64),
            alpha_snapshot=np.array(state.alpha[idx], dtype=np.float64),
            targets=None if classification else data.labels,
            labels=np.ascontiguousarray(data.labels[idx]) if classification else None,
        )

    @property
    def m(self) -> int:
        return self.block.size


# --------------------------------------------------------------------------- #
# single-coordinate closed forms

def coord_update_elasticnet(a_j, norm_sq_j, alpha_j, vtilde, lam, eta, d):
    """Exact minimizer over one coordinate of the elastic-net objective.

    ``vtilde`` is the current residual ``A alpha - b``.
    """
    denom = norm_sq_j + lam * eta * d
    tau = lam * d * (1.0 - eta) / denom
    gamma = (alpha_j * norm_sq_j - float(np.dot(a_j, vtilde))) / denom
    return float(np.sign(gamma) * max(abs(gamma) - tau, 0.0))


def coord_update_svm(a_j, norm_sq_j, y_j, alpha_j, vhat, lam, n):
    """Box-clipped exact minimizer over one coordinate of the dual SVM; ``vhat = A alpha``."""
    scale = 1.0 / (lam * n)
    step = (y_j - scale * float(np.dot(a_j, vhat))) / (scale * norm_sq_j)
    return float(y_j * max(0.0, min(1.0, y_j * (alpha_j + step))))


# --------------------------------------------------------------------------- #

def _shadow(p: ProblemSpec, view: LocalBlockView):
    if p.family is Family.SVM:
        return view.v_snapshot.copy()
    return view.v_snapshot - view.targets


def _sweep_order(seed, sweep, m):
    return np.random.default_rng([int(seed), int(sweep)]).permutation(m).astype(np.intp)


def sweep_once(p, view, alpha, shadow, order, backend):
    if p.family is Family.SVM:
        backend.svm_sweep(view.columns, view.norms, view.labels, alpha, shadow, order,
                          p.lam, float(p.n))
    else:
        eta = 1.0 if p.family is Family.RIDGE else p.eta
        backend.en_sweep(view.columns, view.norms, alpha, shadow, order, p.lam, eta,
                         float(p.d))


def _backend(backend):
    if backend is None:
        return kernels
    if isinstance(backend, str):
        return kernels.get_backend(backend)
    return backend


def block_objective(p: ProblemSpec, view: LocalBlockView, alpha_block, shadow) -> float:
    """``f`` plus the block's ``g_i``; differences equal differences of the full objective."""
    if p.family is Family.SVM:
        fit = float(shadow @ shadow) / (2.0 * p.lam * p.n * p.n)
    else:
        fit = float(shadow @ shadow) / (2.0 * p.d)
    return fit + float(np.sum(coord_regularizer(p, alpha_block, view.labels)))


def run_sweeps(p: ProblemSpec, view: LocalBlockView, budget: SolverBudget, backend=None):
    """Run ``budget.passes`` sweeps; returns the local coefficients and shadow vector."""
    be = _backend(backend)
    alpha = view.alpha_snapshot.copy()
    shadow = _shadow(p, view)
    for k in range(int(budget.passes)):
        sweep_once(p, view, alpha, shadow, _sweep_order(budget.seed, k, view.m), be)
    return alpha, shadow


def solve_block(p: ProblemSpec, view: LocalBlockView, budget: SolverBudget, backend=None):
    alpha, _ = run_sweeps(p, view, budget, backend)
    return alpha - view.alpha_snapshot


def _closed_form_ridge(p, view):
    cols = view.columns
    eta = 1.0 if p.family is Family.RIDGE else p.eta
    reg = p.lam * eta * p.d
    gram = cols.T @ cols
    gram[np.diag_indices_from(gram)] += reg
    rhs = -(cols.T @ (view.v_snapshot - view.targets)) - reg * view.alpha_snapshot
    try:
        return np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("singular block system; lambda must be positive") from exc


def exact_block_solve(p: ProblemSpec, view: LocalBlockView, backend=None, seed=0,
                      return_sweeps=False):
    """Reference block minimizer (the theta = 1 update).

    Ridge-type blocks use the regularized normal equations.  Other families run
    seeded sweeps until one sweep lowers the objective by less than
    ``TOL.exact_decrease``.
    """
    if p.family is Family.RIDGE or (p.family is Family.ELASTIC_NET and p.eta == 1.0):
        delta = _closed_form_ridge(p, view)
        return (delta, 1) if return_sweeps else delta
    be = _backend(backend)
    alpha = view.alpha_snapshot.copy()
    shadow = _shadow(p, view)
    prev = block_objective(p, view, alpha, shadow)
    sweeps = 0
    while sweeps < TOL.exact_max_sweeps:
        sweep_once(p, view, alpha, shadow, _sweep_order(seed, sweeps, view.m), be)
        sweeps += 1
        cur = block_objective(p, view, alpha, shadow)
        if prev - cur < TOL.exact_decrease:
            break
        prev = cur
    delta = alpha - view.alpha_snapshot
    return (delta, sweeps) if return_sweeps else delta


def block_improvement(p: ProblemSpec, view: LocalBlockView, delta) -> float:
    """``O(alpha) - O(alpha + delta)`` for a block update, from local data only."""
    before = block_objective(p, view, view.alpha_snapshot, _shadow(p, view))
    shadow = _shadow(p, view) + view.columns @ delta
    after = block_objective(p, view, view.alpha_snapshot + delta, shadow)
    return before - after


def measure_theta(p: ProblemSpec, view: LocalBlockView, budget: SolverBudget, backend=None) -> float:
    """Fraction of the exact block improvement achieved by ``budget``, clamped to [0, 1]."""
    best = block_improvement(p, view, exact_block_solve(p, view, backend))
    if best < TOL.theta_denominator:
        return 1.0
    got = block_improvement(p, view, solve_block(p, view, budget, backend))
    return float(min(1.0, max(0.0, got / best)))
