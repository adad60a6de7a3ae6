"""Command-line front end.

Workflows (subcommands, or `--workflow NAME` anywhere in the argument
list):

  adaptive   Strategy 1: self-consistent field loop at one (Gamma, gamma)
  sweep      standard transverse-field runs over a --grid of field values
  cross      Strategy 2: sweep + crossing analysis + remap
  exact      exact solver rows over Gamma (and gamma) values
  signcheck  stoquasticity report and naive Suzuki-Trotter sign

Common flags: --model FILE.toml, --beta, --tau, --sweeps-equil,
--sweeps-meas, --grid min:max:step, --Gamma, --gamma, --seed, --workers
(or NONSTOQ_WORKERS), --out FILE.csv.

Exit codes: 0 success, 2 configuration/parse error, 3 numerical workflow
error, 4 I/O error.  Grid points fan out over a process pool when
--workers > 1; per-point sub-seeds are derived from the position in the
grid, so parallel and serial runs emit identical CSVs.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .adaptive import AdaptiveParams, adaptive_solve
from .crossing import find_crossings, grid_values, remap, sweep_standard
from .csvio import COLUMNS, oracle_row, record_row, write_rows
from .engine import MCParams
from .errors import ConfigError, NonStoqError
from .model import (
    ClassicalIsing,
    Fluctuation,
    Linear,
    LinearQuadratic,
    NonStoqModel,
    load_model_file,
)
from .oracle import dense_ed, is_stoquastic, naive_sign_report, spin_symmetric_exact

__all__ = ["RunConfig", "run_cli", "main"]

WORKFLOWS = ("adaptive", "sweep", "cross", "exact", "signcheck")

SIGNCHECK_COLUMNS = [
    "workflow", "N", "beta", "tau", "Gamma", "gamma",
    "stoquastic", "max_offdiagonal", "min_transfer_entry", "average_sign",
]


@dataclass(frozen=True)
class RunConfig:
    """Typed snapshot of one CLI invocation: exactly one workflow, the
    model file it references, and the knobs that workflow consumes."""

    workflow: str
    model: str
    beta: float
    out: Optional[str] = None
    Gamma: Optional[str] = None
    gamma: Optional[str] = None
    grid: Optional[str] = None
    tau: Optional[int] = None
    sweeps_equil: int = 20000
    sweeps_meas: int = 80000
    measure_interval: int = 1
    seed: int = 1
    workers: Optional[int] = None
    damping: float = 0.5
    tolerance: float = 0.005
    max_iterations: int = 50
    initial_field: Optional[float] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in vars(args).items() if k in known})


def parse_grid(text: str) -> Tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be min:max:step, got {text!r}")
    try:
        gmin, gmax, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"grid must be numeric, got {text!r}") from exc
    if step <= 0 or gmax < gmin or gmin < 0:
        raise ConfigError(f"grid needs 0 <= min <= max and step > 0, got {text!r}")
    return gmin, gmax, step


def _float_list(text: str) -> List[float]:
    try:
        return [float(p) for p in text.split(",") if p != ""]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated floats, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonstoq",
        description="Sign-problem-free QMC for H = H0 - N*f(m_x) models",
    )
    sub = parser.add_subparsers(dest="workflow", required=True)

    def common(p, mc=True):
        p.add_argument("--model", required=True, help="TOML model file")
        p.add_argument("--beta", type=float, required=True)
        p.add_argument("--Gamma", help="override Gamma (comma list allowed for exact)")
        p.add_argument("--gamma", help="override gamma (comma list allowed for exact)")
        p.add_argument("--out", help="CSV output path")
        if mc:
            p.add_argument("--tau", type=int, default=128)
            p.add_argument("--sweeps-equil", type=int, default=20000)
            p.add_argument("--sweeps-meas", type=int, default=80000)
            p.add_argument("--measure-interval", type=int, default=1)
            p.add_argument("--seed", type=int, default=1)

    p = sub.add_parser("adaptive", help="Strategy 1 self-consistent loop")
    common(p)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--tolerance", type=float, default=0.005)
    p.add_argument("--max-iterations", type=int, default=50)
    p.add_argument("--initial-field", type=float, default=None,
                   help="starting effective field (default: f'(0))")

    p = sub.add_parser("sweep", help="standard transverse-field sweep over --grid")
    common(p)
    p.add_argument("--grid", required=True, help="min:max:step")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("cross", help="Strategy 2 crossing analysis over --grid")
    common(p)
    p.add_argument("--grid", required=True, help="min:max:step")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("exact", help="exact solver reference rows")
    common(p, mc=False)
    p.add_argument("--grid", help="Gamma grid min:max:step (else --Gamma list)")

    p = sub.add_parser("signcheck", help="stoquasticity and naive sign report")
    common(p, mc=False)
    p.add_argument("--tau", type=int, default=2)

    return parser


def _workflow_shim(argv: List[str]) -> List[str]:
    """Accept `--workflow NAME` as an alias for the NAME subcommand."""
    if "--workflow" not in argv:
        return argv
    argv = list(argv)
    k = argv.index("--workflow")
    if k + 1 >= len(argv):
        raise ConfigError("--workflow needs a value")
    name = argv[k + 1]
    if name not in WORKFLOWS:
        raise ConfigError(f"unknown workflow {name!r}; choose from {WORKFLOWS}")
    del argv[k : k + 2]
    return [name] + argv


def _workers(cfg: RunConfig) -> int:
    w = cfg.workers
    if w is None:
        w = int(os.environ.get("NONSTOQ_WORKERS", "1"))
    if w < 1:
        raise ConfigError("workers must be >= 1")
    return w


def _resolve_fluctuation(file_fluct, cfg: RunConfig) -> Optional[Fluctuation]:
    """Apply --Gamma/--gamma overrides on top of the model file."""
    G_txt, g_txt = cfg.Gamma, cfg.gamma
    if G_txt is None and g_txt is None:
        return file_fluct
    G = _float_list(G_txt)[0] if G_txt is not None else None
    g = _float_list(g_txt)[0] if g_txt is not None else None
    base_G, base_g = 0.0, 0.0
    if isinstance(file_fluct, Linear):
        base_G = file_fluct.Gamma
    elif isinstance(file_fluct, LinearQuadratic):
        base_G, base_g = file_fluct.Gamma, file_fluct.gamma
    G = base_G if G is None else G
    g = base_g if g is None else g
    if g == 0.0:
        return Linear(Gamma=G)
    return LinearQuadratic(Gamma=G, gamma=g)


def _target_params(fluct) -> Tuple[Optional[float], Optional[float]]:
    if isinstance(fluct, Linear):
        return fluct.Gamma, 0.0
    if isinstance(fluct, LinearQuadratic):
        return fluct.Gamma, fluct.gamma
    return None, None


def _mc_params(cfg: RunConfig) -> MCParams:
    return MCParams(
        beta=cfg.beta,
        tau=cfg.tau,
        equilibration_sweeps=cfg.sweeps_equil,
        measurement_sweeps=cfg.sweeps_meas,
        seed=cfg.seed,
        measure_interval=cfg.measure_interval,
    )


def _emit(rows, columns, out) -> None:
    for row in rows:
        parts = []
        for c in columns:
            v = row.get(c)
            if v is None:
                continue
            parts.append(f"{c}={v:.6g}" if isinstance(v, float) else f"{c}={v}")
        print("  ".join(parts))
    if out:
        write_rows(out, rows) if columns is COLUMNS else _write_custom(out, rows, columns)


def _write_custom(out, rows, columns) -> None:
    import csv
    import tempfile

    directory = os.path.dirname(os.fspath(out)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nonstoq-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow(["" if row.get(c) is None else
                            (format(row[c], ".17g") if isinstance(row[c], float)
                             else ("true" if row[c] is True else "false" if row[c] is False
                                   else str(row[c])))
                            for c in columns])
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_adaptive(cfg: RunConfig, classical, fluct) -> int:
    if fluct is None:
        raise ConfigError("adaptive needs a fluctuation (model file section or --Gamma/--gamma)")
    model = NonStoqModel(classical=classical, fluctuation=fluct)
    init = cfg.initial_field
    if init is None:
        init = float(fluct.derivative(0.0))
        if init <= 0:
            raise ConfigError("f'(0) <= 0; pass --initial-field explicitly")
    params = AdaptiveParams(
        initial_field=init,
        mc=_mc_params(cfg),
        damping=cfg.damping,
        tolerance=cfg.tolerance,
        max_outer_iterations=cfg.max_iterations,
    )
    res = adaptive_solve(model, params)
    G, g = _target_params(fluct)
    rows = [record_row("adaptive", res.record, Gamma=G, gamma=g,
                       gamma_tilde=res.fixed_point_field, converged=res.converged)]
    _emit(rows, COLUMNS, cfg.out)
    return 0


def _pool_map(workers: int):
    if workers == 1:
        return None, None
    pool = ProcessPoolExecutor(max_workers=workers)
    return pool, pool.map


def _run_sweep(cfg: RunConfig, classical, fluct, analyse: bool) -> int:
    grid = parse_grid(cfg.grid)
    params = _mc_params(cfg)
    pool, map_fn = _pool_map(_workers(cfg))
    try:
        table = sweep_standard(classical, grid, params, map_fn=map_fn)
    finally:
        if pool is not None:
            pool.shutdown()
    rows = [
        record_row("sweep", rec, gamma_tilde=float(gt))
        for gt, rec in zip(table.gamma_tilde, table.records)
    ]
    _emit(rows, COLUMNS, cfg.out)
    if not analyse:
        return 0

    if fluct is None:
        raise ConfigError("cross needs a fluctuation (model file section or --Gamma/--gamma)")
    result = find_crossings(table, fluct)
    G, g = _target_params(fluct)
    crows = [
        record_row("crossing", c.record, Gamma=G, gamma=g, gamma_tilde=c.gamma_tilde)
        for c in result.crossings
    ]
    if result.selected_index is not None:
        rec = remap(result, fluct)
        crows.append(record_row("cross", rec, Gamma=G, gamma=g,
                                gamma_tilde=result.selected.gamma_tilde))
    print(f"crossings: {len(result.crossings)}  selection: {result.selection_method}")
    if cfg.out:
        stem, ext = os.path.splitext(cfg.out)
        _emit(crows, COLUMNS, stem + "_crossings" + (ext or ".csv"))
    else:
        _emit(crows, COLUMNS, None)
    return 0


def _is_uniform(classical: ClassicalIsing) -> bool:
    h = classical.fields
    return not classical.couplings and bool((h == h[0]).all())


def _run_exact(cfg: RunConfig, classical, fluct) -> int:
    if cfg.grid is not None:
        Gs = [float(v) for v in grid_values(*parse_grid(cfg.grid))]
    elif cfg.Gamma is not None:
        Gs = _float_list(cfg.Gamma)
    elif isinstance(fluct, (Linear, LinearQuadratic)):
        Gs = [fluct.Gamma]
    else:
        raise ConfigError("exact needs --grid or --Gamma")
    if cfg.gamma is not None:
        gs = _float_list(cfg.gamma)
    elif isinstance(fluct, LinearQuadratic):
        gs = [fluct.gamma]
    else:
        gs = [0.0]

    rows = []
    uniform = _is_uniform(classical)
    for g in gs:
        for G in Gs:
            f = LinearQuadratic(Gamma=G, gamma=g) if g != 0.0 else Linear(Gamma=G)
            if uniform:
                res = spin_symmetric_exact(
                    h=float(classical.fields[0]),
                    j_ir=classical.infinite_range_coupling,
                    f=f,
                    beta=cfg.beta,
                    n_spins=classical.n_spins,
                )
            else:
                res = dense_ed(NonStoqModel(classical=classical, fluctuation=f), cfg.beta)
            rows.append(oracle_row("exact", res, Gamma=G, gamma=g))
    _emit(rows, COLUMNS, cfg.out)
    return 0


def _run_signcheck(cfg: RunConfig, classical, fluct) -> int:
    if fluct is None:
        raise ConfigError("signcheck needs a fluctuation (model file section or --Gamma/--gamma)")
    model = NonStoqModel(classical=classical, fluctuation=fluct)
    sto = is_stoquastic(model)
    sign = naive_sign_report(model, tau=cfg.tau, beta=cfg.beta)
    G, g = _target_params(fluct)
    rows = [{
        "workflow": "signcheck",
        "N": classical.n_spins,
        "beta": cfg.beta,
        "tau": cfg.tau,
        "Gamma": G,
        "gamma": g,
        "stoquastic": sto.stoquastic,
        "max_offdiagonal": sto.max_offdiagonal,
        "min_transfer_entry": sign.min_transfer_entry,
        "average_sign": sign.average_sign,
    }]
    _emit(rows, SIGNCHECK_COLUMNS, cfg.out)
    return 0


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _workflow_shim(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.from_args(args)
        classical, file_fluct = load_model_file(cfg.model)
        fluct = _resolve_fluctuation(file_fluct, cfg)
        if cfg.workflow == "adaptive":
            return _run_adaptive(cfg, classical, fluct)
        if cfg.workflow == "sweep":
            return _run_sweep(cfg, classical, fluct, analyse=False)
        if cfg.workflow == "cross":
            return _run_sweep(cfg, classical, fluct, analyse=True)
        if cfg.workflow == "exact":
            return _run_exact(cfg, classical, fluct)
        return _run_signcheck(cfg, classical, fluct)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonStoqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


def main() -> None:
    sys.exit(run_cli())
