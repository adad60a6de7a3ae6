"""Sign-problem-free quantum Monte Carlo for Ising models with a
transverse-fluctuation drive.

The target Hamiltonian is

    H = H0(sigma) - N * f(Mx / N)

with H0 a classical Ising energy and f a smooth function of the average
transverse magnetisation.  For nonlinear f the term couples all spins and
generically makes H non-stoquastic, so a direct path-integral simulation
would carry a sign problem.  The package implements two routes around it:

* solve a self-consistent effective transverse field so the sampled
  weight stays positive (``adaptive_solve``), or
* sweep a plain transverse-field model over a grid and locate the
  self-consistency point by crossing analysis (``sweep_standard``,
  ``find_crossings``, ``remap``).

Small systems are cross-checked against exact diagonalisation
(``spin_symmetric_exact``, ``dense_ed``) and a brute-force transfer-matrix
sign measurement (``naive_sign_report``).
"""

from .errors import (
    NonStoqError,
    ConfigError,
    DegenerateFieldError,
    InsufficientStatisticsError,
    UnsupportedInverseError,
    SizeLimitError,
    NoCrossingError,
    ExtrapolationError,
    MustSelectError,
)
from .model import (
    Fluctuation,
    Linear,
    LinearQuadratic,
    Polynomial,
    ClassicalIsing,
    NonStoqModel,
    f_eval,
    f_prime,
    f_prime_inverse,
    classical_energy,
    energy_delta,
    uniform_model,
    load_model_file,
)
from .stats import bin_series, binned_mean_err, jackknife
from .engine import (
    PathConfiguration,
    MCParams,
    ObservableRecord,
    ReplicaResult,
    seed_sequence,
    trotter_coupling,
    metropolis_sweep,
    measure_mz,
    measure_mz_abs,
    measure_mx,
    measure_energy,
    run_fixed_field,
    replica_exchange_run,
)
from .oracle import (
    SpectralResult,
    StoquasticityReport,
    SignReport,
    spin_symmetric_exact,
    dense_ed,
    is_stoquastic,
    naive_sign_report,
)
from .adaptive import AdaptiveParams, AdaptiveResult, adaptive_solve, langevin_step
from .crossing import (
    SweepTable,
    Crossing,
    CrossingResult,
    grid_values,
    sweep_standard,
    find_crossings,
    free_energy_compare,
    remap,
)
from .csvio import COLUMNS, record_row, oracle_row, write_rows, read_rows

__version__ = "0.1.0"

__all__ = [
    "NonStoqError",
    "ConfigError",
    "DegenerateFieldError",
    "InsufficientStatisticsError",
    "UnsupportedInverseError",
    "SizeLimitError",
    "NoCrossingError",
    "ExtrapolationError",
    "MustSelectError",
    "Fluctuation",
    "Linear",
    "LinearQuadratic",
    "Polynomial",
    "ClassicalIsing",
    "NonStoqModel",
    "f_eval",
    "f_prime",
    "f_prime_inverse",
    "classical_energy",
    "energy_delta",
    "uniform_model",
    "load_model_file",
    "bin_series",
    "binned_mean_err",
    "jackknife",
    "PathConfiguration",
    "MCParams",
    "ObservableRecord",
    "ReplicaResult",
    "seed_sequence",
    "trotter_coupling",
    "metropolis_sweep",
    "measure_mz",
    "measure_mz_abs",
    "measure_mx",
    "measure_energy",
    "run_fixed_field",
    "replica_exchange_run",
    "SpectralResult",
    "StoquasticityReport",
    "SignReport",
    "spin_symmetric_exact",
    "dense_ed",
    "is_stoquastic",
    "naive_sign_report",
    "AdaptiveParams",
    "AdaptiveResult",
    "adaptive_solve",
    "langevin_step",
    "SweepTable",
    "Crossing",
    "CrossingResult",
    "grid_values",
    "sweep_standard",
    "find_crossings",
    "free_energy_compare",
    "remap",
    "COLUMNS",
    "record_row",
    "oracle_row",
    "write_rows",
    "read_rows",
]
