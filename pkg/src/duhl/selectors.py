"""Block selection policies and the block-importance ratio rho."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .tolerances import TOL


class PolicyKind(str, enum.Enum):
    GAP_ORACLE = "gap-oracle"
    GAP_MEMORY = "gap-memory"
    RANDOM = "random"
    SEQUENTIAL = "sequential"
    IMPORTANCE = "importance"


@dataclass(frozen=True)
class SelectionPolicy:
    kind: PolicyKind
    m: int

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if int(self.m) < 1:
            raise ValueError(f"block size must be >= 1, got {self.m}")


def select_topm(scores, m) -> np.ndarray:
    """Indices of the ``m`` largest scores, ties to the lower index, sorted ascending."""
    scores = np.asarray(scores, dtype=np.float64)
    n = scores.size
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    order = np.lexsort((np.arange(n), -scores))
    return np.sort(order[:m]).astype(np.intp)


def select_random(n, m, rng) -> np.ndarray:
    m = min(m, n)
    return np.sort(rng.choice(n, size=m, replace=False)).astype(np.intp)


def select_sequential(n, m, round_) -> np.ndarray:
    m = min(m, n)
    n_blocks = -(-n // m)
    k = round_ % n_blocks
    return np.arange(k * m, min((k + 1) * m, n), dtype=np.intp)


def select_importance(norms_sq, m, rng) -> np.ndarray:
    """``m`` successive draws without replacement, each proportional to ``norms_sq``
    among the indices not drawn yet (uniform once the remaining weight is zero)."""
    weights = np.array(norms_sq, dtype=np.float64)
    n = weights.size
    m = min(m, n)
    alive = np.ones(n, dtype=bool)
    chosen = []
    for _ in range(m):
        w = np.where(alive, weights, 0.0)
        total = w.sum()
        if total <= 0.0:
            w = alive.astype(np.float64)
            total = w.sum()
        cdf = np.cumsum(w)
        j = int(np.searchsorted(cdf, rng.random() * total, side="right"))
        j = min(j, n - 1)
        while not alive[j]:  # guards the cdf edge when trailing weights are zero
            j -= 1
        alive[j] = False
        chosen.append(j)
    return np.sort(np.array(chosen, dtype=np.intp))


def rho(block, gaps) -> float:
    """Mean gap over ``block`` divided by the mean gap over all coordinates."""
    gaps = np.asarray(gaps, dtype=np.float64)
    total = float(gaps.sum())
    if total <= TOL.gap_zero:
        return 1.0
    idx = np.asarray(block, dtype=np.intp)
    return float(gaps[idx].mean() / (total / gaps.size))
