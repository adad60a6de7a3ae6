"""CSV emission with a fixed column schema shared by all workflows.

Floats are written with 17 significant digits so every file re-parses to
the exact in-memory value.  Files are written atomically (temp file in
the same directory, then rename).  Oracle rows carry zero errors and an
empty acceptance column; columns that do not apply to a workflow are
left empty.
"""

from __future__ import annotations

import csv
import os
import tempfile
from typing import Iterable, List, Optional

from .engine import ObservableRecord
from .oracle import SpectralResult

__all__ = ["COLUMNS", "record_row", "oracle_row", "write_rows", "read_rows"]

COLUMNS = [
    "workflow",
    "N",
    "beta",
    "tau",
    "Gamma",
    "gamma",
    "gamma_tilde",
    "m_x",
    "m_x_err",
    "m_z_abs",
    "m_z_abs_err",
    "energy_per_spin",
    "energy_err",
    "acceptance_rate",
    "sweeps_equil",
    "sweeps_meas",
    "seed",
    "converged",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def record_row(
    workflow: str,
    record: ObservableRecord,
    Gamma: Optional[float] = None,
    gamma: Optional[float] = None,
    gamma_tilde: Optional[float] = None,
    converged: Optional[bool] = None,
) -> dict:
    return {
        "workflow": workflow,
        "N": record.n_spins,
        "beta": record.beta,
        "tau": record.tau,
        "Gamma": Gamma,
        "gamma": gamma,
        "gamma_tilde": gamma_tilde,
        "m_x": record.m_x,
        "m_x_err": record.m_x_err,
        "m_z_abs": record.m_z_abs,
        "m_z_abs_err": record.m_z_abs_err,
        "energy_per_spin": record.energy_per_spin,
        "energy_err": record.energy_err,
        "acceptance_rate": record.acceptance_rate,
        "sweeps_equil": record.sweeps_equil,
        "sweeps_meas": record.sweeps_meas,
        "seed": record.seed,
        "converged": converged,
    }


def oracle_row(
    workflow: str,
    result: SpectralResult,
    Gamma: Optional[float] = None,
    gamma: Optional[float] = None,
    gamma_tilde: Optional[float] = None,
) -> dict:
    return {
        "workflow": workflow,
        "N": result.n_spins,
        "beta": result.beta,
        "tau": None,
        "Gamma": Gamma,
        "gamma": gamma,
        "gamma_tilde": gamma_tilde,
        "m_x": result.m_x,
        "m_x_err": 0.0,
        "m_z_abs": result.m_z_abs,
        "m_z_abs_err": 0.0,
        "energy_per_spin": result.energy_per_spin,
        "energy_err": 0.0,
        "acceptance_rate": None,
        "sweeps_equil": None,
        "sweeps_meas": None,
        "seed": None,
        "converged": None,
    }


def write_rows(path, rows: Iterable[dict]) -> None:
    """Atomic CSV write: temp file next to the target, then os.replace."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".nonstoq-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row.get(c)) for c in COLUMNS])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse(text: str):
    if text == "":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_rows(path) -> List[dict]:
    """Parse a file written by write_rows back into typed dicts."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: _parse(v) for k, v in row.items()} for row in reader]
