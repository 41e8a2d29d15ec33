"""Round loops: approximate block coordinate descent and DuHL.

Both entry points share one loop.  Per round it selects a block, loads it on
the simulated fast unit (counting swapped columns), computes a block update
from the round-start snapshot, applies it to ``alpha`` and ``v`` and records a
:class:`RoundTrace`.  In DuHL the block comes from the gap memory ``z``, which
the slow unit refreshes from possibly stale iterates.

Row 0 of every trace is the initial point; row ``t`` is the state after
``t`` rounds together with the statistics of the round that produced it.
"""
from __future__ import annotations

import enum
import logging
import threading
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .data import Dataset, column_norms_sq
from .exceptions import NumericalError
from .problems import ProblemSpec, TrainState, coord_gaps, objective
from .selectors import (PolicyKind, SelectionPolicy, rho, select_importance, select_random,
                        select_sequential, select_topm)
from .tolerances import TOL
from .solver import LocalBlockView, SolverBudget, exact_block_solve, run_sweeps

log = logging.getLogger(__name__)


class RefreshMode(str, enum.Enum):
    ORACLE = "oracle"
    FIXED_COUNT = "fixed"
    CONCURRENT = "concurrent"


@dataclass
class GapMemory:
    z: np.ndarray
    age: np.ndarray
    init: str = "initial-gaps"

    @classmethod
    def from_gaps(cls, gaps) -> "GapMemory":
        return cls(np.array(gaps, dtype=np.float64), np.zeros(len(gaps), dtype=np.int64))

    def tick(self):
        self.age += 1


@dataclass
class RoundTrace:
    round: int
    epochs: float
    objective: float
    total_gap: float
    rho: float = float("nan")
    swaps: int = 0
    gap_updates: int = 0
    suboptimality: Optional[float] = None
    block: Tuple[int, ...] = ()
    block_gap: float = 0.0           # sum of fresh gaps over the block at round start
    distinct_refreshed: int = 0
    rho_degenerate: bool = False
    max_age: int = 0
    sweeps: int = 0


@dataclass(frozen=True)
class DuhlConfig:
    policy: SelectionPolicy
    budget: SolverBudget = SolverBudget(passes=1)
    exact: bool = False
    refresh: RefreshMode = RefreshMode.FIXED_COUNT
    refresh_fraction: float = 0.05
    max_rounds: int = 100
    stop_gap: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "refresh", RefreshMode(self.refresh))
        if not 0.0 <= self.refresh_fraction <= 1.0:
            raise ValueError("refresh_fraction must lie in [0, 1]")
        if self.max_rounds < 0:
            raise ValueError("max_rounds must be nonnegative")

    @property
    def m(self) -> int:
        return self.policy.m

    def refresh_count(self, n) -> int:
        return int(round(self.refresh_fraction * n))


def swap_count(prev_block, new_block) -> int:
    """Columns loaded onto the fast unit; a cold start loads the whole block."""
    if prev_block is None:
        return len(new_block)
    return len(set(map(int, new_block)) - set(map(int, prev_block)))


def gap_memory_refresh(p: ProblemSpec, data: Dataset, alpha, v, memory: GapMemory, indices):
    """Set ``z_j`` to the gap of coordinate ``j`` at the given (snapshot) iterate."""
    idx = np.unique(np.asarray(indices, dtype=np.intp))
    if idx.size:
        memory.z[idx] = coord_gaps(p, data, alpha, v, idx)
        memory.age[idx] = 0
    return memory


def _round_seed(seed, t):
    return int(np.random.SeedSequence([int(seed), int(t)]).generate_state(1, np.uint64)[0])


class _Loop:
    def __init__(self, p: ProblemSpec, data: Dataset, cfg: DuhlConfig, backend=None):
        if cfg.m > data.n:
            raise ValueError(f"block size m={cfg.m} exceeds n={data.n}")
        self.p, self.data, self.cfg, self.backend = p, data, cfg, backend
        ss = np.random.SeedSequence(int(cfg.seed))
        sel_seq, refresh_seq = ss.spawn(2)
        self.sel_rng = np.random.default_rng(sel_seq)
        self.refresh_rng = np.random.default_rng(refresh_seq)
        self.norms = column_norms_sq(data)
        self.state = TrainState.zeros(data)
        self.prev_block = None
        self.epochs = 0.0
        self.gaps = coord_gaps(p, data, self.state.alpha, self.state.v)

    def _row0(self):
        obj = objective(self.p, self.data, self.state.alpha, self.state.v)
        return RoundTrace(0, self.epochs, obj, float(self.gaps.sum()))

    def _solve(self, view, t):
        if self.cfg.exact:
            delta, sweeps = exact_block_solve(self.p, view, self.backend,
                                              seed=_round_seed(self.cfg.seed, t),
                                              return_sweeps=True)
            return delta, sweeps
        budget = SolverBudget(self.cfg.budget.passes, _round_seed(self.cfg.seed, t))
        alpha, _ = run_sweeps(self.p, view, budget, self.backend)
        return alpha - view.alpha_snapshot, budget.passes

    def _apply(self, block, delta):
        st = self.state
        st.alpha[block] += delta
        st.v += self.data.A[:, block] @ delta
        st.t += 1
        if st.resync(self.data):
            log.debug("round %d: v drifted, resynchronized", st.t)

    def step(self, block, gap_updates, refresh_fn=None):
        """One round on ``block``; ``refresh_fn(alpha, v)`` runs on the slow unit meanwhile."""
        t = self.state.t
        n = self.data.n
        swaps = swap_count(self.prev_block, block)
        self.prev_block = block
        block_gap = float(self.gaps[block].sum())
        r = rho(block, self.gaps)
        degenerate = float(self.gaps.sum()) <= TOL.gap_zero
        view = LocalBlockView.from_state(self.data, self.state, block, self.norms)
        alpha_snap = self.state.alpha.copy()
        v_snap = self.state.v.copy()

        refreshed = None
        if refresh_fn is not None and self.cfg.refresh is RefreshMode.CONCURRENT:
            done = threading.Event()
            box = {}

            def unit_a():
                try:
                    box["r"] = refresh_fn(alpha_snap, v_snap, done)
                except BaseException as exc:  # re-raised on the orchestrator thread
                    box["err"] = exc

            worker = threading.Thread(target=unit_a)
            worker.start()
            try:
                delta, sweeps = self._solve(view, t)
            finally:
                done.set()
                worker.join()
            if "err" in box:
                raise box["err"]
            refreshed = box["r"]
        else:
            delta, sweeps = self._solve(view, t)
            if refresh_fn is not None:
                refreshed = refresh_fn(alpha_snap, v_snap, None)
        if refreshed is not None:
            gap_updates = refreshed

        self._apply(block, delta)
        self.gaps = coord_gaps(self.p, self.data, self.state.alpha, self.state.v)
        obj = objective(self.p, self.data, self.state.alpha, self.state.v)
        total = float(self.gaps.sum())
        if not (np.isfinite(obj) and np.isfinite(total)):
            raise NumericalError(f"round {t}: objective={obj}, gap={total}")
        self.epochs += (sweeps * len(block) + gap_updates) / n
        return RoundTrace(
            round=self.state.t, epochs=self.epochs, objective=obj, total_gap=total,
            rho=r, swaps=swaps, gap_updates=int(gap_updates), block=tuple(int(i) for i in block),
            block_gap=block_gap, rho_degenerate=degenerate, sweeps=int(sweeps),
        )

    def finished(self):
        return float(self.gaps.sum()) <= self.cfg.stop_gap


def run_block_cd(p: ProblemSpec, data: Dataset, cfg: DuhlConfig, backend=None) -> List[RoundTrace]:
    """Approximate block coordinate descent with a fixed selection policy."""
    kind = cfg.policy.kind
    if kind is PolicyKind.GAP_MEMORY:
        return run_duhl(p, data, cfg, backend)
    loop = _Loop(p, data, cfg, backend)
    n, m = data.n, cfg.m
    traces = [loop._row0()]
    for t in range(cfg.max_rounds):
        if loop.finished():
            break
        gap_updates = 0
        if kind is PolicyKind.GAP_ORACLE:
            block = select_topm(loop.gaps, m)
            gap_updates = n
        elif kind is PolicyKind.RANDOM:
            block = select_random(n, m, loop.sel_rng)
        elif kind is PolicyKind.SEQUENTIAL:
            block = select_sequential(n, m, t)
        else:
            block = select_importance(loop.norms, m, loop.sel_rng)
        row = loop.step(block, gap_updates)
        row.distinct_refreshed = gap_updates
        traces.append(row)
    return traces


def run_duhl(p: ProblemSpec, data: Dataset, cfg: DuhlConfig, backend=None) -> List[RoundTrace]:
    """DuHL: top-m selection on the gap memory, refreshed by the slow unit.

    Oracle mode keeps ``z`` equal to the true gaps at the current iterate.
    FixedCount draws ``k`` coordinates uniformly with replacement per round and
    refreshes them at the round-start iterate.  Concurrent mode refreshes from
    a second thread until the block solve finishes.  In the two stale modes
    the block's own entries are refreshed from the post-update iterate.
    """
    loop = _Loop(p, data, cfg, backend)
    n, m = data.n, cfg.m
    mode = cfg.refresh
    memory = GapMemory.from_gaps(loop.gaps)
    traces = [loop._row0()]
    if mode is not RefreshMode.ORACLE:
        # initial full evaluation of z at alpha = 0
        loop.epochs += 1.0
        traces[0].epochs = loop.epochs
        traces[0].gap_updates = n
        traces[0].distinct_refreshed = n
    k = cfg.refresh_count(n)
    lock = threading.Lock()
    distinct = {}

    def fixed_refresh(alpha, v, _done):
        draws = loop.refresh_rng.integers(0, n, size=k)
        gap_memory_refresh(p, data, alpha, v, memory, draws)
        distinct["count"] = int(np.unique(draws).size)
        return k

    def concurrent_refresh(alpha, v, done):
        count = 0
        seen = set()
        while not done.is_set():
            j = int(loop.refresh_rng.integers(0, n))
            val = coord_gaps(p, data, alpha, v, [j])
            with lock:
                memory.z[j] = val[0]
                memory.age[j] = 0
            seen.add(j)
            count += 1
        distinct["count"] = len(seen)
        return count

    for _ in range(cfg.max_rounds):
        if loop.finished():
            break
        with lock:
            block = select_topm(memory.z, m)
        if mode is RefreshMode.ORACLE:
            row = loop.step(block, n)
            memory.z[:] = loop.gaps
            memory.age[:] = 0
            row.distinct_refreshed = n
        else:
            memory.tick()
            fn = fixed_refresh if mode is RefreshMode.FIXED_COUNT else concurrent_refresh
            row = loop.step(block, 0, fn)
            # block entries from the post-update iterate
            memory.z[block] = loop.gaps[block]
            memory.age[block] = 0
            row.distinct_refreshed = distinct.get("count", 0)
        row.max_age = int(memory.age.max())
        traces.append(row)
    return traces
