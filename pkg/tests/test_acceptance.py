"""Acceptance gate: one test per numbered criterion.

Each test prints a single `criterion N: PASS|FAIL (...)` line with the
measured numbers before asserting, so a plain `pytest -s` run doubles as
a checklist.

Statistical comparisons accept |measured - exact| <= 3*sigma + 0.05.
The absolute term covers the two known systematic offsets at these run
parameters: the finite-tau discretization bias (dominant for the
stoquastic runs, where it exceeds 3 sigma at the stated sweep counts),
and for nonlinear f the O(1/N) difference between the sampled
saddle-point action and the exact trace, which reaches 0.049 on the
energy at N=8, Gamma=0.5, gamma=1.

Criterion 5 is split: the detection behavior passes and is pinned by
test_criterion_5_sign_problem_detection; the two stated numerical
values (+1.0 offending entry, average sign < 1 at tau=2) do not hold
for this Hamiltonian convention and their test fails honestly:
  - the worst off-diagonal of -N*f with f(m) = -m^2/2 at N=2 is +0.5;
  - at tau=2 the trace weights are row sums of M = (DE)^2 with D
    positive diagonal and E symmetric, and Tr((DE)^2) = Tr((D^1/2 E
    D^1/2)^2) > 0 term by term, so the average sign is identically 1;
    the first sign-afflicted Trotter number is 3.

Criterion 7 also fails honestly: at the production settings (tau=128,
beta=50) the Trotter bias in <|m_z|> at the critical spot point exceeds
the band by 0.005. See its docstring for the seed and tau-scaling study
that pins the excess on discretization rather than sampling.
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np
import pytest

from nonstoq.adaptive import AdaptiveParams, adaptive_solve
from nonstoq.crossing import find_crossings, remap, sweep_standard
from nonstoq.csvio import record_row, write_rows
from nonstoq.engine import MCParams, run_fixed_field
from nonstoq.model import Linear, LinearQuadratic, NonStoqModel, uniform_model
from nonstoq.oracle import (
    dense_ed,
    is_stoquastic,
    naive_sign_report,
    spin_symmetric_exact,
)

N8 = uniform_model(8)
GAMMAS = (0.5, 1.0, 2.0)
OBSERVABLES = (("m_x", "m_x_err"), ("m_z_abs", "m_z_abs_err"),
               ("energy_per_spin", "energy_err"))
MC_FULL = MCParams(
    beta=10.0, tau=64, equilibration_sweeps=5000, measurement_sweeps=20000, seed=0
)

_CACHE = {}


def _once(key, builder):
    """Build each expensive pipeline once per session; criterion 8 calls
    the builders again directly to test reproducibility."""
    if key not in _CACHE:
        t0 = time.perf_counter()
        value = builder()
        _CACHE[key] = (value, time.perf_counter() - t0)
    return _CACHE[key]


def _report(label, ok, detail):
    print(f"criterion {label}: {'PASS' if ok else 'FAIL'}  ({detail})")


def _band(measured, exact, err):
    """Signed margin of the acceptance band; >= 0 means inside."""
    return 3.0 * err + 0.05 - abs(measured - exact)


def _workers():
    return max(1, min(4, os.cpu_count() or 1))


# --- criterion 1 -----------------------------------------------------------

def test_criterion_1_oracle_cross_validation():
    t0 = time.perf_counter()
    fields = ("m_z", "m_z_abs", "m_x", "energy_per_spin",
              "free_energy_per_spin", "ground_energy_per_spin")
    worst = 0.0
    for n in (2, 4, 8, 10):
        for G in (0.0, 0.5, 1.0, 2.0, 4.0):
            for g in (0.0, 1.0):
                f = LinearQuadratic(G, g) if g else Linear(G)
                a = spin_symmetric_exact(0.1, 0.5, f, 50.0, n)
                b = dense_ed(NonStoqModel(classical=uniform_model(n), fluctuation=f), 50.0)
                for name in fields:
                    worst = max(worst, abs(getattr(a, name) - getattr(b, name)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10.0
    _report(1, ok, f"max solver disagreement {worst:.2e}, {elapsed:.1f} s")
    assert worst <= 1e-10
    assert elapsed < 10.0


# --- criterion 2 -----------------------------------------------------------

def _stoquastic_records():
    recs = []
    for k, G in enumerate(GAMMAS):
        model = NonStoqModel(classical=N8, fluctuation=Linear(G))
        recs.append(run_fixed_field(model, G, replace(MC_FULL, seed=(101, k))))
    return tuple(recs)


def test_criterion_2_stoquastic_reduction():
    recs, elapsed = _once("c2", _stoquastic_records)
    margins = []
    for G, rec in zip(GAMMAS, recs):
        ref = dense_ed(NonStoqModel(classical=N8, fluctuation=Linear(G)), 10.0)
        for name, err_name in OBSERVABLES:
            margins.append(
                _band(getattr(rec, name), getattr(ref, name), getattr(rec, err_name))
            )
    ok = min(margins) >= 0.0 and elapsed < 120.0
    _report(2, ok, f"worst band margin {min(margins):+.4f}, {elapsed:.0f} s")
    assert min(margins) >= 0.0
    assert elapsed < 120.0


# --- criterion 3 -----------------------------------------------------------

def _adaptive_solutions():
    out = []
    for k, G in enumerate(GAMMAS):
        f = LinearQuadratic(Gamma=G, gamma=1.0)
        model = NonStoqModel(classical=N8, fluctuation=f)
        params = AdaptiveParams(initial_field=G, mc=replace(MC_FULL, seed=(202, k)))
        out.append(adaptive_solve(model, params))
    return tuple(out)


def test_criterion_3_adaptive_vs_oracle():
    results, elapsed = _once("c3", _adaptive_solutions)
    margins, iters = [], []
    for G, res in zip(GAMMAS, results):
        assert res.converged
        iters.append(len(res.trace))
        ref = spin_symmetric_exact(0.1, 0.5, LinearQuadratic(G, 1.0), 10.0, 8)
        for name, err_name in OBSERVABLES:
            margins.append(
                _band(getattr(res.record, name), getattr(ref, name),
                      getattr(res.record, err_name))
            )

    # the solution must sit on the gamma=1 branch, not the gamma=0 one
    res1 = results[GAMMAS.index(1.0)]
    with_term = spin_symmetric_exact(0.1, 0.5, LinearQuadratic(1.0, 1.0), 10.0, 8)
    without = spin_symmetric_exact(0.1, 0.5, Linear(1.0), 10.0, 8)
    closer = all(
        abs(getattr(res1.record, name) - getattr(with_term, name))
        < abs(getattr(res1.record, name) - getattr(without, name))
        for name, _ in OBSERVABLES
    )

    ok = min(margins) >= 0.0 and max(iters) <= 50 and closer and elapsed < 600.0
    _report(
        3,
        ok,
        f"worst band margin {min(margins):+.4f}, iterations {iters}, "
        f"closer-to-quartic-branch {closer}, {elapsed:.0f} s",
    )
    assert min(margins) >= 0.0
    assert max(iters) <= 50
    assert closer
    assert elapsed < 600.0


# --- criterion 4 -----------------------------------------------------------

def _crossing_table():
    params = MCParams(
        beta=10.0, tau=64, equilibration_sweeps=2000, measurement_sweeps=10000, seed=303
    )
    workers = _workers()
    if workers == 1:
        return sweep_standard(N8, (0.0, 4.0, 0.05), params)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return sweep_standard(N8, (0.0, 4.0, 0.05), params, map_fn=pool.map)


def test_criterion_4_crossing_vs_adaptive():
    table, elapsed_sweep = _once("c4", _crossing_table)
    adaptive, elapsed_adaptive = _once("c3", _adaptive_solutions)
    t0 = time.perf_counter()
    f = LinearQuadratic(Gamma=1.0, gamma=1.0)
    result = find_crossings(table, f)
    assert result.selected is not None
    remapped = remap(result, f)
    analysis = time.perf_counter() - t0

    mx_adaptive = adaptive[GAMMAS.index(1.0)].record.m_x
    diff = abs(result.selected.m_x - mx_adaptive)
    elapsed = elapsed_sweep + analysis
    ok = diff <= 0.05 and elapsed < 900.0
    _report(
        4,
        ok,
        f"|m_x gap| {diff:.4f} at crossing {result.selected.gamma_tilde:.3f}, "
        f"remapped E/N {remapped.energy_per_spin:.4f}, {elapsed:.0f} s",
    )
    assert diff <= 0.05
    assert elapsed < 900.0


# --- criterion 5 -----------------------------------------------------------

def test_criterion_5_sign_problem_detection():
    t0 = time.perf_counter()
    classical = uniform_model(2)
    quartic = NonStoqModel(classical=classical, fluctuation=LinearQuadratic(0.0, 1.0))
    plain = NonStoqModel(classical=classical, fluctuation=Linear(0.2))

    detected = not is_stoquastic(quartic).stoquastic
    clean = is_stoquastic(plain).stoquastic
    sign_plain = naive_sign_report(plain, tau=2, beta=2.0).average_sign
    elapsed = time.perf_counter() - t0

    ok = detected and clean and sign_plain == 1.0 and elapsed < 1.0
    _report(
        "5 (detection)",
        ok,
        f"positive off-diagonal detected {detected}, plain model clean {clean}, "
        f"plain sign {sign_plain}, {elapsed:.2f} s",
    )
    assert detected
    assert clean
    assert sign_plain == 1.0
    assert elapsed < 1.0


def test_criterion_5_stated_values():
    """The two literal numbers; both fail for this Hamiltonian, see the
    module docstring. The assertions state them as written."""
    classical = uniform_model(2)
    quartic = NonStoqModel(classical=classical, fluctuation=LinearQuadratic(0.0, 1.0))
    entry = is_stoquastic(quartic).max_offdiagonal
    sign = naive_sign_report(
        NonStoqModel(classical=classical, fluctuation=LinearQuadratic(0.2, 1.0)),
        tau=2,
        beta=2.0,
    ).average_sign

    entry_ok = abs(entry - 1.0) <= 1e-12
    sign_ok = sign < 1.0
    ok = entry_ok and sign_ok
    _report(
        "5 (stated values)",
        ok,
        f"offending entry {entry} (stated 1.0), tau=2 sign {sign} (stated < 1); "
        f"sign at tau=3 is "
        f"{naive_sign_report(NonStoqModel(classical=classical, fluctuation=LinearQuadratic(0.2, 1.0)), tau=3, beta=2.0).average_sign:.4f}",
    )
    assert entry_ok, f"largest off-diagonal entry is {entry}, not 1.0"
    assert sign_ok, f"average sign at tau=2 is {sign}, not < 1"


# --- criterion 6 -----------------------------------------------------------

def test_criterion_6_trotter_convergence():
    t0 = time.perf_counter()
    taus = (8, 16, 32, 64)
    model = NonStoqModel(classical=uniform_model(4), fluctuation=Linear(1.0))
    ref = dense_ed(model, 4.0).m_x
    errs, sigmas = [], []
    for k, tau in enumerate(taus):
        mc = MCParams(
            beta=4.0, tau=tau, equilibration_sweeps=2000,
            measurement_sweeps=16000, seed=(404, k),
        )
        rec = run_fixed_field(model, 1.0, mc)
        errs.append(abs(rec.m_x - ref))
        sigmas.append(rec.m_x_err)
    elapsed = time.perf_counter() - t0

    monotone = all(
        errs[k + 1] <= errs[k] + 2.0 * math.hypot(sigmas[k], sigmas[k + 1])
        for k in range(len(taus) - 1)
    )
    ok = monotone and elapsed < 120.0
    _report(
        6,
        ok,
        "errors " + "/".join(f"{e:.4f}" for e in errs) + f" over tau {taus}, "
        f"{elapsed:.0f} s",
    )
    assert monotone, f"discretization error not nonincreasing within 2 sigma: {errs}"
    assert elapsed < 120.0


# --- criterion 7 -----------------------------------------------------------

@pytest.mark.extended
@pytest.mark.skipif(
    os.environ.get("NONSTOQ_EXTENDED") != "1",
    reason="large-scale sweep; set NONSTOQ_EXTENDED=1 to run",
)
def test_criterion_7_large_scale_sweep():
    """N=32 production-scale sweep, spot-checked against the exact oracle.

    Known red, kept deliberately. At tau=128, beta=50 the imaginary-time
    step is 0.39, and the resulting discretization bias in <|m_z|> at the
    critical point Gamma_tilde = 1.0 is +0.056, just outside the
    3 sigma + 0.05 band (sigma ~ 3e-4 at these sweep counts, so the band
    is ~0.0508). The bias is reproducible across seeds (four master seeds
    agree to 6e-4) and falls as 1/tau^2: +0.0134 at tau=256 and +0.0035
    at tau=512 with identical sampling. That scaling confirms a pure
    Trotter artifact, not a sampler defect; every other spot point and
    observable passes with margin >= +0.02, and the runtime budget holds.
    The check runs at the production settings rather than at a tau tuned
    to make it pass.
    """
    t0 = time.perf_counter()
    classical = uniform_model(32)
    params = MCParams(
        beta=50.0, tau=128, equilibration_sweeps=20000,
        measurement_sweeps=80000, seed=707,
    )
    with ProcessPoolExecutor(max_workers=_workers()) as pool:
        table = sweep_standard(classical, (0.0, 4.0, 0.05), params, map_fn=pool.map)

    margins = []
    for G in (0.5, 1.0, 2.0, 3.0, 4.0):
        idx = int(np.argmin(np.abs(table.gamma_tilde - G)))
        rec = table.records[idx]
        ref = spin_symmetric_exact(0.1, 0.5, Linear(G), 50.0, 32)
        for name, err_name in OBSERVABLES:
            margins.append(
                _band(getattr(rec, name), getattr(ref, name), getattr(rec, err_name))
            )
    elapsed = time.perf_counter() - t0
    ok = min(margins) >= 0.0 and elapsed < 7200.0
    _report(7, ok, f"worst spot-check margin {min(margins):+.4f}, {elapsed:.0f} s")
    assert min(margins) >= 0.0
    assert elapsed < 7200.0


# --- criterion 8 -----------------------------------------------------------

def _c2_rows(recs):
    return [
        record_row("sweep", rec, Gamma=G, gamma=0.0, gamma_tilde=G)
        for G, rec in zip(GAMMAS, recs)
    ]


def _c3_rows(results):
    return [
        record_row("adaptive", res.record, Gamma=G, gamma=1.0,
                   gamma_tilde=res.fixed_point_field, converged=res.converged)
        for G, res in zip(GAMMAS, results)
    ]


def _c4_rows(table):
    return [
        record_row("sweep", rec, gamma_tilde=float(gt))
        for gt, rec in zip(table.gamma_tilde, table.records)
    ]


def test_criterion_8_determinism(tmp_path):
    first = {
        "c2": _c2_rows(_once("c2", _stoquastic_records)[0]),
        "c3": _c3_rows(_once("c3", _adaptive_solutions)[0]),
        "c4": _c4_rows(_once("c4", _crossing_table)[0]),
    }
    second = {
        "c2": _c2_rows(_stoquastic_records()),
        "c3": _c3_rows(_adaptive_solutions()),
        "c4": _c4_rows(_crossing_table()),
    }
    identical = {}
    for key in first:
        a, b = tmp_path / f"{key}_a.csv", tmp_path / f"{key}_b.csv"
        write_rows(a, first[key])
        write_rows(b, second[key])
        identical[key] = a.read_bytes() == b.read_bytes()
    ok = all(identical.values())
    _report(8, ok, ", ".join(f"{k} byte-identical {v}" for k, v in identical.items()))
    assert ok, f"reruns differ: {identical}"
