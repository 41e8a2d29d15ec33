"""Every numeric guard used by the package, in one place."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # coordinate gaps below -gap_clamp mean w was stale
    gap_clamp: float = 1e-12
    # total gap at or below this makes rho degenerate (returns 1)
    gap_zero: float = 1e-14
    # ||v - A alpha||_inf <= v_sync * (1 + ||v||_inf) at round boundaries
    v_sync: float = 1e-9
    power_rtol: float = 1e-8
    power_max_iter: int = 10_000
    # exact block solve: stop when a sweep decreases the objective by less
    exact_decrease: float = 1e-14
    exact_max_sweeps: int = 100_000
    theta_denominator: float = 1e-14
    # reference optimum certificate
    reference_gap: float = 1e-12
    reference_gap_fail: float = 1e-10
    reference_max_epochs: int = 1_000_000
    # sweeps without a new best gap before the reference solver gives up
    reference_stall_epochs: int = 200
    # bound checks: measured >= required - bound_rel * (1 + |required|)
    bound_rel: float = 1e-10
    rate_rel: float = 1e-9


TOL = Tolerances()
