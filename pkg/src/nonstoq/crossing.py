"""Strategy 2: crossing-point analysis.

Run the plain stoquastic transverse-field model over a grid of field
values Gamma_tilde, build the measured curve m_x(Gamma_tilde), and
intersect it with the line m = f'^{-1}(Gamma_tilde).  A crossing
(Gamma_tilde*, m_x*) realizes the self-consistency condition
Gamma_tilde = f'(m_x) of the target model, so the standard-model
observables at Gamma_tilde* can be re-labeled as results for the
non-stoquastic model at (Gamma, gamma); only the energy needs the
correction that swaps the transverse term Gamma_tilde*m_x for f(m_x).

Interpolation is piecewise linear on the measured points, with no
smoothing: smoothing would hide genuine multivaluedness near first-order
transitions.  Statistical noise can instead fake extra sign changes, so
crossings closer than one grid step are merged at an error-weighted
midpoint.  When several genuine crossings remain, the thermodynamically
stable one is picked by comparing free energies via thermodynamic
integration of the measured curve,

    Phi(c) = Phi_ref - int_ref^c m_x(u) du + (m_x* f'(m_x*) - f(m_x*)),

with the reference at the largest grid value (deep paramagnetic side);
only differences matter.  A tie within tolerance is reported as
unresolved rather than silently picking one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .engine import MCParams, ObservableRecord, run_fixed_field
from .errors import ExtrapolationError, MustSelectError, NoCrossingError
from .model import ClassicalIsing, Fluctuation, Linear, NonStoqModel

__all__ = [
    "SweepTable",
    "Crossing",
    "CrossingResult",
    "grid_values",
    "sweep_standard",
    "find_crossings",
    "free_energy_compare",
    "remap",
]


def grid_values(gmin: float, gmax: float, step: float) -> np.ndarray:
    """Grid min:max:step, inclusive of both ends within half a step."""
    if step <= 0:
        raise ValueError("grid step must be > 0")
    if gmax < gmin:
        raise ValueError("grid max must be >= min")
    n = int(np.floor((gmax - gmin) / step + 0.5)) + 1
    return np.round(gmin + step * np.arange(n), 12)


@dataclass(frozen=True)
class SweepTable:
    """Measured m_x(Gamma_tilde) curve: one record per grid value."""

    gamma_tilde: np.ndarray
    records: Tuple[ObservableRecord, ...]
    grid: Tuple[float, float, float]  # (min, max, step)

    def __post_init__(self):
        gt = np.asarray(self.gamma_tilde, dtype=float)
        gt.setflags(write=False)
        object.__setattr__(self, "gamma_tilde", gt)
        object.__setattr__(self, "records", tuple(self.records))
        if len(self.records) != gt.size:
            raise ValueError("one record per grid value required")
        if gt.size >= 2 and not np.all(np.diff(gt) > 0):
            raise ValueError("gamma_tilde must be strictly increasing")
        meta = {(r.n_spins, r.beta, r.tau) for r in self.records}
        if len(meta) > 1:
            raise ValueError("all rows must share (N, beta, tau)")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def m_x(self) -> np.ndarray:
        return self.column("m_x")


@dataclass(frozen=True)
class Crossing:
    gamma_tilde: float
    m_x: float
    record: ObservableRecord  # table interpolated at gamma_tilde


@dataclass(frozen=True)
class CrossingResult:
    crossings: Tuple[Crossing, ...]
    selected_index: Optional[int]
    selection_method: str  # only_crossing | free_energy | unresolved

    @property
    def selected(self) -> Optional[Crossing]:
        return None if self.selected_index is None else self.crossings[self.selected_index]


def _sweep_point(job) -> ObservableRecord:
    classical, gt, params = job
    model = NonStoqModel(classical=classical, fluctuation=Linear(Gamma=float(gt)))
    return run_fixed_field(model, float(gt), params)


def sweep_standard(
    model: ClassicalIsing,
    grid: Tuple[float, float, float],
    params: MCParams,
    map_fn: Optional[Callable] = None,
) -> SweepTable:
    """One run_fixed_field per grid value with f = Linear(Gamma_tilde).

    Grid point j uses sub-seed (master, j), so results are independent
    of execution order; pass an executor's map as map_fn to parallelize.
    """
    gmin, gmax, step = grid
    if gmin < 0:
        raise ValueError("grid min must be >= 0")
    values = grid_values(gmin, gmax, step)
    base = (int(params.seed),) if np.isscalar(params.seed) else tuple(params.seed)
    jobs = [
        (model, float(g), replace(params, seed=base + (j,))) for j, g in enumerate(values)
    ]
    mapper = map if map_fn is None else map_fn
    records = list(mapper(_sweep_point, jobs))
    return SweepTable(gamma_tilde=values, records=records, grid=(gmin, gmax, step))


def _interp_record(table: SweepTable, gt: float) -> ObservableRecord:
    x = table.gamma_tilde
    k = int(np.clip(np.searchsorted(x, gt) - 1, 0, x.size - 2))
    t = (gt - x[k]) / (x[k + 1] - x[k])
    a, b = table.records[k], table.records[k + 1]

    def lerp(name):
        return (1.0 - t) * getattr(a, name) + t * getattr(b, name)

    return ObservableRecord(
        n_spins=a.n_spins,
        beta=a.beta,
        tau=a.tau,
        effective_field=float(gt),
        m_z=lerp("m_z"),
        m_z_err=lerp("m_z_err"),
        m_z_abs=lerp("m_z_abs"),
        m_z_abs_err=lerp("m_z_abs_err"),
        m_x=lerp("m_x"),
        m_x_err=lerp("m_x_err"),
        energy_per_spin=lerp("energy_per_spin"),
        energy_err=lerp("energy_err"),
        acceptance_rate=lerp("acceptance_rate"),
        sweeps_equil=a.sweeps_equil,
        sweeps_meas=a.sweeps_meas,
        seed="",
    )


def _line_values(f: Fluctuation, gt: np.ndarray) -> np.ndarray:
    return np.array([float(f.inverse_derivative(g)) for g in gt])


def find_crossings(
    table: SweepTable,
    f: Fluctuation,
    merge_within: Optional[float] = None,
    tie_atol: float = 1e-9,
) -> CrossingResult:
    """Intersect the measured curve with m = f'^{-1}(Gamma_tilde).

    Every sign change of g(Gamma_tilde) = m_x_curve - f'^{-1} on the
    piecewise-linear curve yields a crossing.  Crossings closer than
    merge_within (default: one grid step) are merged to their
    error-weighted midpoint.  With several surviving crossings the
    free-energy comparison selects one; a tie is left unresolved.
    """
    if table.gamma_tilde.size < 2:
        raise ValueError("need at least 2 table rows")
    x = table.gamma_tilde
    g = table.m_x - _line_values(f, x)

    points = []
    for k in range(x.size - 1):
        if g[k] == 0.0:
            points.append(float(x[k]))
        elif g[k] * g[k + 1] < 0.0:
            t = g[k] / (g[k] - g[k + 1])
            points.append(float(x[k] + t * (x[k + 1] - x[k])))
    if g[-1] == 0.0:
        points.append(float(x[-1]))
    if not points:
        raise NoCrossingError(
            f"curve and f'^(-1) line never cross on grid [{x[0]}, {x[-1]}]"
        )

    step = table.grid[2]
    window = step if merge_within is None else merge_within
    merged = True
    while merged and len(points) > 1:
        merged = False
        for k in range(len(points) - 1):
            if points[k + 1] - points[k] < window:
                ra = _interp_record(table, points[k])
                rb = _interp_record(table, points[k + 1])
                wa = 1.0 / max(ra.m_x_err, 1e-300) ** 2
                wb = 1.0 / max(rb.m_x_err, 1e-300) ** 2
                mid = (wa * points[k] + wb * points[k + 1]) / (wa + wb)
                points[k : k + 2] = [mid]
                merged = True
                break

    crossings = []
    for p in points:
        rec = _interp_record(table, p)
        crossings.append(Crossing(gamma_tilde=float(p), m_x=float(rec.m_x), record=rec))
    crossings = tuple(crossings)

    if len(crossings) == 1:
        return CrossingResult(crossings, 0, "only_crossing")
    chosen = free_energy_compare(table, f, crossings, tie_atol=tie_atol)
    if chosen is None:
        return CrossingResult(crossings, None, "unresolved")
    return CrossingResult(crossings, chosen, "free_energy")


def free_energy_compare(
    table: SweepTable,
    f: Fluctuation,
    crossings: Sequence[Crossing],
    tie_atol: float = 1e-9,
) -> Optional[int]:
    """Pick the crossing with the lowest effective free energy.

    Phi(c) = -int_{ref}^{c} m_x_curve(u) du + (m_x* f'(m_x*) - f(m_x*)),
    reference at the top of the grid, trapezoidal rule (exact for the
    piecewise-linear curve).  Returns the argmin index, or None when the
    two best values agree within tie_atol.  A single crossing returns 0
    without any comparison.
    """
    if len(crossings) == 1:
        return 0
    x = table.gamma_tilde
    y = table.m_x
    lo, hi = x[0], x[-1]
    for c in crossings:
        if not lo <= c.gamma_tilde <= hi:
            raise ExtrapolationError(
                f"crossing at {c.gamma_tilde} outside grid [{lo}, {hi}]"
            )
    # cumulative integral of the piecewise-linear curve from the grid start
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))))

    def integral_to(c: float) -> float:
        k = int(np.clip(np.searchsorted(x, c) - 1, 0, x.size - 2))
        t = (c - x[k]) / (x[k + 1] - x[k])
        yc = (1.0 - t) * y[k] + t * y[k + 1]
        return float(cum[k] + 0.5 * (y[k] + yc) * (c - x[k]))

    ref = integral_to(float(hi))
    phi = np.empty(len(crossings))
    for i, c in enumerate(crossings):
        saddle = c.m_x * float(f.derivative(c.m_x)) - float(f.value(c.m_x))
        phi[i] = -(integral_to(c.gamma_tilde) - ref) + saddle
    order = np.argsort(phi)
    if phi[order[1]] - phi[order[0]] <= tie_atol:
        return None
    return int(order[0])


def remap(result: CrossingResult, f: Fluctuation) -> ObservableRecord:
    """Re-label the selected crossing as a result of the non-stoquastic
    model: E = <H0>/N - f(m_x*), replacing the standard run's
    -Gamma_tilde*m_x transverse energy."""
    if result.selected_index is None:
        raise MustSelectError(
            "crossing selection is unresolved; cannot remap observables"
        )
    c = result.crossings[result.selected_index]
    rec = c.record
    energy = rec.energy_per_spin + c.gamma_tilde * c.m_x - float(f.value(c.m_x))
    slope = c.gamma_tilde - float(f.derivative(c.m_x))
    err = float(np.hypot(rec.energy_err, slope * rec.m_x_err))
    return replace(rec, energy_per_spin=float(energy), energy_err=err)
