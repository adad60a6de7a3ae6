"""Strategy 1: self-consistent adaptive transverse field.

Alternates QMC estimation of m_x at the current effective field with the
saddle-point update mtilde_x = f'(m_x) until the measured m_x stops
moving.  The bare update can oscillate when the composed map has slope
near -1, so the update is damped:

    mtilde <- (1 - alpha) * mtilde + alpha * f'(m_x),  alpha in (0, 1].

Early iterations run at 10% of the measurement budget; once two
consecutive estimates agree within the tolerance, iterations switch to
the full budget, and convergence is declared on the first pair of
consecutive full-budget estimates that agree.  Convergence is measured
on m_x (bounded, dimensionless) rather than the field itself.

A Langevin stepper for m_x is provided as an alternative relaxation; the
fixed-point loop is the default solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .engine import MCParams, ObservableRecord, run_fixed_field
from .model import Fluctuation, NonStoqModel

__all__ = ["AdaptiveParams", "AdaptiveResult", "adaptive_solve", "langevin_step"]


@dataclass(frozen=True)
class AdaptiveParams:
    initial_field: float
    mc: MCParams
    damping: float = 0.5
    tolerance: float = 0.005
    max_outer_iterations: int = 50

    def __post_init__(self):
        if self.initial_field <= 0:
            raise ValueError("initial_field must be > 0")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must be in (0, 1]")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")


@dataclass(frozen=True)
class AdaptiveResult:
    record: ObservableRecord
    fixed_point_field: float
    trace: Tuple[Tuple[float, float], ...]  # (field used, measured m_x) per iteration
    converged: bool


def _seed_base(seed) -> tuple:
    return (int(seed),) if isinstance(seed, (int, np.integer)) else tuple(seed)


def adaptive_solve(model: NonStoqModel, params: AdaptiveParams) -> AdaptiveResult:
    """Iterate run_fixed_field and the damped saddle-point update.

    Iteration k samples with sub-seed (master, k), so a rerun with the
    same parameters reproduces the result exactly.  Non-convergence
    within max_outer_iterations returns converged=False, not an error.
    A field driven to <= 0 is handled by the engine's classical branch
    (m_x = 0 there, and f'(0) then pulls the field back up).

    With a constant f' the saddle-point field does not depend on the
    measurement at all, so the loop collapses to a single full-budget
    run at f'(0); this makes the Linear(Gamma) case bit-identical to
    run_fixed_field(model, Gamma).
    """
    f = model.fluctuation
    mc = params.mc
    if f.constant_derivative:
        c = float(f.derivative(0.0))
        record = run_fixed_field(model, c, mc)
        return AdaptiveResult(
            record=record, fixed_point_field=c, trace=((c, record.m_x),), converged=True
        )

    base = _seed_base(mc.seed)
    small_meas = max(mc.measurement_sweeps // 10, 2 * mc.measure_interval)
    alpha, tol, max_outer = params.damping, params.tolerance, params.max_outer_iterations

    field = params.initial_field
    trace = []
    record: Optional[ObservableRecord] = None
    converged = False
    k = 0

    # search phase at reduced budget, capped so two full iterations remain
    mx_prev = None
    while k < max_outer - 2:
        rec = run_fixed_field(
            model, field, replace(mc, measurement_sweeps=small_meas, seed=base + (k,))
        )
        trace.append((field, rec.m_x))
        field = (1.0 - alpha) * field + alpha * float(f.derivative(rec.m_x))
        k += 1
        if mx_prev is not None and abs(rec.m_x - mx_prev) <= tol:
            break
        mx_prev = rec.m_x

    # refinement at the full budget until two consecutive estimates agree
    full_prev = None
    while k < max_outer:
        record = run_fixed_field(model, field, replace(mc, seed=base + (k,)))
        trace.append((field, record.m_x))
        field = (1.0 - alpha) * field + alpha * float(f.derivative(record.m_x))
        k += 1
        if full_prev is not None and abs(record.m_x - full_prev) <= tol:
            converged = True
            break
        full_prev = record.m_x

    if record is None:  # max_outer too small for any full-budget run
        record = run_fixed_field(model, field, replace(mc, seed=base + (k,)))
        trace.append((field, record.m_x))

    final_mx = trace[-1][1]
    return AdaptiveResult(
        record=record,
        fixed_point_field=float(f.derivative(final_mx)),
        trace=tuple(trace),
        converged=converged,
    )


def langevin_step(
    m: float,
    mean_sigma_x: float,
    f: Fluctuation,
    dt: float,
    beta: float,
    n_spins: int,
    noise: float,
) -> float:
    """One Euler step of the relaxation of m_x toward <sigma^x>.

    The drift s*N*f''(m)*(m - mean_sigma_x) uses the stabilization sign
    s = -sign(f''(m)) so the linearized drift is contracting regardless
    of the curvature sign of f; with f''(m) = 0 the step is pure
    diffusion.  The noise amplitude sqrt(2*dt/beta) is N-independent
    while the drift grows with N, so large systems track the
    deterministic fixed point m = mean_sigma_x.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    curv = float(f.second_derivative(m))
    s = -math.copysign(1.0, curv) if curv != 0.0 else 0.0
    drift = s * n_spins * curv * (m - mean_sigma_x)
    return m + drift * dt + math.sqrt(2.0 * dt / beta) * noise
