"""Path-integral Monte Carlo sampler at a fixed effective transverse field.

The Suzuki-Trotter form sampled here is the classical action on an
(N, tau) array of +-1 spins with periodic imaginary-time boundary,

    W(sigma) = exp( -(beta/tau) sum_t H0(sigma_t)
                    + B sum_{i,t} sigma_{i,t} sigma_{i,t+1} ),

    B = -log(tanh(beta * mtilde_x / tau)) / 2,

where mtilde_x > 0 is the effective field, a single value shared by all
slices (static approximation).  Note the beta/tau inside the tanh: the
coupling and the estimator below are only mutually consistent with the
1/tau present in both, which is also what the tau -> infinity limit
requires.

The transverse magnetization estimator is

    m_x = (1/(N tau)) sum_{i,t} tanh(beta mtilde_x / tau)^(sigma_{i,t} sigma_{i,t+1}),

i.e. tanh(a) for an aligned bond and 1/tanh(a) for an anti-aligned bond.

For mtilde_x <= 0 the coupling B diverges; the engine then takes the
classical branch: slices move in lockstep, which is the exact
tau -> infinity limit at zero transverse field, and m_x is reported 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .errors import DegenerateFieldError, InsufficientStatisticsError
from .model import ClassicalIsing, NonStoqModel
from .stats import binned_mean_err, jackknife

__all__ = [
    "PathConfiguration",
    "MCParams",
    "ObservableRecord",
    "ReplicaResult",
    "trotter_coupling",
    "metropolis_sweep",
    "measure_mx",
    "measure_mz",
    "measure_mz_abs",
    "measure_energy",
    "run_fixed_field",
    "replica_exchange_run",
]

Seed = Union[int, Sequence[int]]


def seed_sequence(seed: Seed) -> Tuple[np.random.SeedSequence, str]:
    """Normalize a seed (int, tuple of ints for derived sub-streams, or
    the printable "7"/"7:3" string form) into a SeedSequence plus its
    printable form.  Round-trips: seed_sequence("7:3") == seed_sequence((7, 3))."""
    if isinstance(seed, (int, np.integer)):
        parts: Tuple[int, ...] = (int(seed),)
    elif isinstance(seed, str):
        parts = tuple(int(x) for x in seed.split(":"))
    else:
        parts = tuple(int(x) for x in seed)
    if not parts:
        raise ValueError("seed must contain at least one integer")
    ss = np.random.SeedSequence(parts[0], spawn_key=parts[1:])
    return ss, ":".join(str(p) for p in parts)


@dataclass
class PathConfiguration:
    """N x tau array of +-1 spins; site index i, Trotter slice t.
    Periodic in t: slice tau-1 couples back to slice 0."""

    spins: np.ndarray

    def __post_init__(self):
        spins = np.ascontiguousarray(self.spins, dtype=np.int8)
        if spins.ndim != 2:
            raise ValueError("spins must be a 2-D (n_spins, tau) array")
        n, tau = spins.shape
        if n < 1 or tau < 2 or tau % 2:
            raise ValueError("need n_spins >= 1 and even tau >= 2")
        if not np.all(np.abs(spins) == 1):
            raise ValueError("spins must be +-1")
        self.spins = spins

    @property
    def n_spins(self) -> int:
        return self.spins.shape[0]

    @property
    def tau(self) -> int:
        return self.spins.shape[1]

    @classmethod
    def random(cls, n_spins: int, tau: int, rng: np.random.Generator) -> "PathConfiguration":
        spins = np.where(rng.random((n_spins, tau)) < 0.5, 1, -1).astype(np.int8)
        return cls(spins)


@dataclass(frozen=True)
class MCParams:
    beta: float
    tau: int
    equilibration_sweeps: int
    measurement_sweeps: int
    seed: Seed
    measure_interval: int = 1
    random_order: bool = False

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.tau < 2 or self.tau % 2:
            raise ValueError("tau must be even and >= 2")
        if self.equilibration_sweeps < 0:
            raise ValueError("equilibration_sweeps must be >= 0")
        if self.measurement_sweeps < 1:
            raise ValueError("measurement_sweeps must be >= 1")
        if self.measure_interval < 1:
            raise ValueError("measure_interval must be >= 1")


@dataclass(frozen=True)
class ObservableRecord:
    """Measured averages with standard errors, plus run metadata."""

    n_spins: int
    beta: float
    tau: int
    effective_field: float
    m_z: float
    m_z_err: float
    m_z_abs: float
    m_z_abs_err: float
    m_x: float
    m_x_err: float
    energy_per_spin: float
    energy_err: float
    acceptance_rate: float
    sweeps_equil: int
    sweeps_meas: int
    seed: str


@dataclass(frozen=True)
class ReplicaResult:
    records: List[ObservableRecord]
    swap_acceptance: np.ndarray  # one rate per adjacent ladder pair


def trotter_coupling(beta: float, tau: int, effective_field: float) -> float:
    """Inter-slice coupling B = -log(tanh(beta*field/tau))/2.

    Strictly positive and decreasing in the field.  Raises
    DegenerateFieldError for field <= 0 (caller takes the classical
    branch)."""
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if tau < 2:
        raise ValueError("tau must be >= 2")
    if effective_field <= 0:
        raise DegenerateFieldError(
            f"effective field {effective_field} <= 0: slice coupling diverges"
        )
    return -0.5 * math.log(math.tanh(beta * effective_field / tau))


def _compiled_h0(classical: ClassicalIsing):
    return (
        classical._indptr,
        classical._indices,
        classical._weights,
        classical.fields,
        classical.infinite_range_coupling,
    )


def metropolis_sweep(
    config: PathConfiguration,
    model: NonStoqModel,
    beta: float,
    tau: int,
    B: float,
    rng: np.random.Generator,
    random_order: bool = False,
) -> int:
    """One full sweep (N*tau proposals) of the path action; flips are
    accepted with min(1, exp(-Delta)), Delta = (beta/tau)*DeltaH0 plus the
    bond-energy change -B*Delta(sum of the two time-neighbor products).
    Mutates config in place and returns the acceptance count."""
    if B < 0 or not np.isfinite(B):
        raise ValueError("B must be finite and >= 0")
    if config.tau != tau:
        raise ValueError("tau does not match config")
    spins = config.spins
    nt = spins.size
    order = rng.permutation(nt) if random_order else np.arange(nt)
    uniforms = rng.random(nt)
    mags = spins.sum(axis=0, dtype=np.int64)
    indptr, indices, weights, h, j_ir = _compiled_h0(model.classical)
    return int(
        _kernels.sweep_quantum(
            spins, indptr, indices, weights, h, j_ir, beta / tau, B, mags, order, uniforms
        )
    )


# ---------------------------------------------------------------------------
# estimators


def _bond_sum(spins: np.ndarray) -> int:
    s = spins.astype(np.int64, copy=False)
    return int((s[:, :-1] * s[:, 1:]).sum() + (s[:, -1] * s[:, 0]).sum())


def _mx_from_spins(spins: np.ndarray, beta: float, tau: int, effective_field: float) -> float:
    th = math.tanh(beta * effective_field / tau)
    nb = spins.size
    aligned = (nb + _bond_sum(spins)) // 2
    return (aligned * th + (nb - aligned) / th) / nb


def measure_mz(config: PathConfiguration) -> float:
    return float(config.spins.mean())


def measure_mz_abs(config: PathConfiguration) -> float:
    """Per-slice |m_z| averaged over slices; the finite-size proxy for
    spontaneous order when all h_i = 0."""
    return float(np.abs(config.spins.mean(axis=0)).mean())


def measure_mx(config: PathConfiguration, beta: float, tau: int, effective_field: float) -> float:
    if effective_field <= 0:
        raise DegenerateFieldError("m_x estimator undefined for effective field <= 0")
    return _mx_from_spins(config.spins, beta, tau, effective_field)


def measure_energy(
    config: PathConfiguration,
    model: NonStoqModel,
    beta: float,
    tau: int,
    effective_field: float,
    measured_mx: float,
) -> float:
    """Energy per spin: slice-averaged H0/N minus f(measured m_x)."""
    h0 = float(model.classical.slice_energies(config.spins).mean())
    return h0 / model.n_spins - model.fluctuation.value(measured_mx)


# ---------------------------------------------------------------------------
# fixed-field run


def _finalize_record(
    model: NonStoqModel,
    params: MCParams,
    effective_field: float,
    seed_str: str,
    mz_s: np.ndarray,
    mzabs_s: np.ndarray,
    mx_s: np.ndarray,
    h0_s: np.ndarray,
    acceptance: float,
    classical_branch: bool,
) -> ObservableRecord:
    mz, mz_err = binned_mean_err(mz_s)
    mzabs, mzabs_err = binned_mean_err(mzabs_s)
    f = model.fluctuation
    if classical_branch:
        mx, mx_err = 0.0, 0.0
        # f(0) = 0 for every variant, so the energy is linear in the samples
        e, e_err = binned_mean_err(h0_s)
    else:
        mx, mx_err = binned_mean_err(mx_s)
        e, e_err = jackknife(lambda h0m, mxm: h0m - f.value(mxm), h0_s, mx_s)
    return ObservableRecord(
        n_spins=model.n_spins,
        beta=params.beta,
        tau=params.tau,
        effective_field=effective_field,
        m_z=mz,
        m_z_err=mz_err,
        m_z_abs=mzabs,
        m_z_abs_err=mzabs_err,
        m_x=mx,
        m_x_err=mx_err,
        energy_per_spin=e,
        energy_err=e_err,
        acceptance_rate=acceptance,
        sweeps_equil=params.equilibration_sweeps,
        sweeps_meas=params.measurement_sweeps,
        seed=seed_str,
    )


class _Chain:
    """Mutable sampling state for one fixed-field chain."""

    def __init__(self, model: NonStoqModel, effective_field: float, params: MCParams,
                 ss: np.random.SeedSequence, seed_str: str):
        self.model = model
        self.params = params
        self.effective_field = effective_field
        self.seed_str = seed_str
        self.rng = np.random.default_rng(ss)
        self.classical_branch = effective_field <= 0
        n, tau = model.n_spins, params.tau
        (self.indptr, self.indices, self.weights, self.h, self.j_ir) = _compiled_h0(model.classical)
        self.beta_tau = params.beta / tau
        if self.classical_branch:
            self.B = math.inf
            row = np.where(self.rng.random(n) < 0.5, 1, -1).astype(np.int8)
            self.spins = np.repeat(row[:, None], tau, axis=1)
            self._order = np.arange(n)
        else:
            self.B = trotter_coupling(params.beta, tau, effective_field)
            self.spins = np.where(self.rng.random((n, tau)) < 0.5, 1, -1).astype(np.int8)
            self.mags = self.spins.sum(axis=0, dtype=np.int64)
            self._order = np.arange(n * tau)
        ns = params.measurement_sweeps // params.measure_interval
        self.samples = {k: np.empty(ns) for k in ("mz", "mzabs", "mx", "h0")}
        self._cursor = 0
        self.accepts = 0

    def sweep(self) -> None:
        p = self.params
        if self.classical_branch:
            col = self.spins[:, 0].copy()
            order = self.rng.permutation(col.size) if p.random_order else self._order
            u = self.rng.random(col.size)
            self.accepts += _kernels.sweep_classical(
                col, self.indptr, self.indices, self.weights, self.h, self.j_ir,
                p.beta, order, u,
            )
            self.spins = np.repeat(col[:, None], p.tau, axis=1)
        else:
            order = self.rng.permutation(self.spins.size) if p.random_order else self._order
            u = self.rng.random(self.spins.size)
            self.accepts += _kernels.sweep_quantum(
                self.spins, self.indptr, self.indices, self.weights, self.h, self.j_ir,
                self.beta_tau, self.B, self.mags, order, u,
            )

    def reset_acceptance(self) -> None:
        self.accepts = 0

    def record_sample(self) -> None:
        k = self._cursor
        spins = self.spins
        self.samples["mz"][k] = spins.mean()
        self.samples["mzabs"][k] = np.abs(spins.mean(axis=0)).mean()
        self.samples["mx"][k] = (
            0.0 if self.classical_branch
            else _mx_from_spins(spins, self.params.beta, self.params.tau, self.effective_field)
        )
        self.samples["h0"][k] = (
            self.model.classical.slice_energies(spins).mean() / self.model.n_spins
        )
        self._cursor = k + 1

    def bond_sum(self) -> int:
        return _bond_sum(self.spins)

    def finalize(self) -> ObservableRecord:
        p = self.params
        proposals = p.measurement_sweeps * (
            self.model.n_spins if self.classical_branch else self.spins.size
        )
        acc = self.accepts / proposals if proposals else 0.0
        return _finalize_record(
            self.model, p, self.effective_field, self.seed_str,
            self.samples["mz"], self.samples["mzabs"], self.samples["mx"], self.samples["h0"],
            acc, self.classical_branch,
        )


def run_fixed_field(model: NonStoqModel, effective_field: float, params: MCParams) -> ObservableRecord:
    """Equilibrate, then sample the path action at fixed effective field.

    Measurements are taken every measure_interval sweeps; errors come
    from binning analysis, the energy error from a jackknife over bins
    (the energy is nonlinear in m_x through f).  Deterministic for a
    given seed.  Raises InsufficientStatisticsError when fewer than two
    samples would be recorded.
    """
    if params.measurement_sweeps // params.measure_interval < 2:
        raise InsufficientStatisticsError(
            "measurement phase yields fewer than 2 samples"
        )
    ss, seed_str = seed_sequence(params.seed)
    chain = _Chain(model, effective_field, params, ss, seed_str)
    for _ in range(params.equilibration_sweeps):
        chain.sweep()
    chain.reset_acceptance()
    for s in range(1, params.measurement_sweeps + 1):
        chain.sweep()
        if s % params.measure_interval == 0:
            chain.record_sample()
    return chain.finalize()


# ---------------------------------------------------------------------------
# replica exchange


def replica_exchange_run(
    model: NonStoqModel,
    field_ladder: Sequence[float],
    params: MCParams,
    swap_interval: Optional[int] = 10,
) -> ReplicaResult:
    """Parallel tempering across a ladder of effective fields.

    Every swap_interval sweeps, adjacent configurations are proposed for
    exchange and accepted with probability min(1, exp((B_a - B_b)(S_b - S_a)))
    where S is the time-bond sum of a configuration; the H0 part of the
    action is field-independent and cancels.  Chain k draws from
    sub-seed (master, k); the swap stream uses (master, K).

    swap_interval=None disables swaps, which reduces exactly to
    independent run_fixed_field calls with the same sub-seeds.
    """
    ladder = [float(g) for g in field_ladder]
    if len(ladder) < 2:
        raise ValueError("field ladder must have length >= 2")
    if any(b < a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("field ladder must be sorted ascending")
    if any(g <= 0 for g in ladder):
        raise ValueError("replica exchange requires all fields > 0")

    base = (int(params.seed),) if isinstance(params.seed, (int, np.integer)) else tuple(params.seed)

    if swap_interval is None:
        records = [
            run_fixed_field(model, g, replace(params, seed=base + (k,)))
            for k, g in enumerate(ladder)
        ]
        return ReplicaResult(records=records, swap_acceptance=np.zeros(len(ladder) - 1))

    if swap_interval < 1 or swap_interval % params.measure_interval:
        raise ValueError("swap_interval must be a positive multiple of measure_interval")
    if params.measurement_sweeps // params.measure_interval < 2:
        raise InsufficientStatisticsError("measurement phase yields fewer than 2 samples")

    chains = []
    for k, g in enumerate(ladder):
        ss, sstr = seed_sequence(base + (k,))
        chains.append(_Chain(model, g, params, ss, sstr))
    swap_rng = np.random.default_rng(seed_sequence(base + (len(ladder),))[0])
    attempts = np.zeros(len(ladder) - 1, dtype=np.int64)
    accepts = np.zeros(len(ladder) - 1, dtype=np.int64)

    def swap_round():
        bonds = [c.bond_sum() for c in chains]
        for k in range(len(chains) - 1):
            a, b = chains[k], chains[k + 1]
            log_ratio = (a.B - b.B) * (bonds[k + 1] - bonds[k])
            attempts[k] += 1
            u = swap_rng.random()
            if log_ratio >= 0.0 or u < math.exp(log_ratio):
                accepts[k] += 1
                a.spins, b.spins = b.spins, a.spins
                a.mags, b.mags = b.mags, a.mags
                bonds[k], bonds[k + 1] = bonds[k + 1], bonds[k]

    for s in range(1, params.equilibration_sweeps + 1):
        for c in chains:
            c.sweep()
        if s % swap_interval == 0:
            swap_round()
    for c in chains:
        c.reset_acceptance()
    for s in range(1, params.measurement_sweeps + 1):
        for c in chains:
            c.sweep()
        if s % params.measure_interval == 0:
            for c in chains:
                c.record_sample()
        if s % swap_interval == 0:
            swap_round()

    rate = np.where(attempts > 0, accepts / np.maximum(attempts, 1), 0.0)
    return ReplicaResult(records=[c.finalize() for c in chains], swap_acceptance=rate)
