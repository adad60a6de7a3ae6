import math

import numpy as np
import pytest
from scipy import stats

from nonstoq import (
    DegenerateFieldError,
    InsufficientStatisticsError,
    Linear,
    LinearQuadratic,
    MCParams,
    NonStoqModel,
    PathConfiguration,
    ReplicaResult,
    measure_energy,
    measure_mx,
    measure_mz,
    measure_mz_abs,
    metropolis_sweep,
    replica_exchange_run,
    run_fixed_field,
    seed_sequence,
    trotter_coupling,
    uniform_model,
)
from reference import TransferMatrix, classical_energies, enumerate_spins


# ---------------------------------------------------------------------------
# seeds, parameters, configuration containers


def test_seed_sequence_plain_and_structured():
    ss1, s1 = seed_sequence(7)
    ss2, s2 = seed_sequence("7")
    assert s1 == s2 == "7"
    assert np.random.default_rng(ss1).random() == np.random.default_rng(ss2).random()

    ss3, s3 = seed_sequence("7:3")
    assert s3 == "7:3"
    ss4, _ = seed_sequence((7, 3))
    assert np.random.default_rng(ss3).random() == np.random.default_rng(ss4).random()
    # sub-streams differ from the root stream
    assert np.random.default_rng(ss3).random() != np.random.default_rng(ss1).random()


def test_seed_sequence_rejects_junk():
    with pytest.raises(ValueError):
        seed_sequence("seven")


def test_path_configuration_validation():
    rng = np.random.default_rng(0)
    cfg = PathConfiguration.random(4, 8, rng)
    assert cfg.spins.shape == (4, 8)
    assert cfg.spins.dtype == np.int8
    with pytest.raises(ValueError):
        PathConfiguration(spins=np.zeros((4, 8), dtype=np.int8))  # not +-1
    with pytest.raises(ValueError):
        PathConfiguration(spins=np.ones((4, 7), dtype=np.int8))  # odd tau
    with pytest.raises(ValueError):
        PathConfiguration(spins=np.ones((4, 0), dtype=np.int8))


def test_mc_params_validation():
    good = dict(beta=1.0, tau=8, equilibration_sweeps=1, measurement_sweeps=4, seed=0)
    MCParams(**good)
    for field, bad in [
        ("beta", 0.0),
        ("tau", 7),
        ("tau", 0),
        ("equilibration_sweeps", -1),
        ("measurement_sweeps", 0),
        ("measure_interval", 0),
    ]:
        with pytest.raises(ValueError):
            MCParams(**{**good, field: bad})


def test_trotter_coupling_frozen_values():
    # -log(tanh(beta*field/tau))/2, high-precision references
    assert trotter_coupling(50.0, 128, 1.0) == pytest.approx(
        0.4945666044533759, abs=1e-15
    )
    assert trotter_coupling(10.0, 64, 0.7) == pytest.approx(
        1.1084747354901463, abs=1e-15
    )


def test_trotter_coupling_degenerate_field():
    with pytest.raises(DegenerateFieldError):
        trotter_coupling(10.0, 64, 0.0)
    with pytest.raises(DegenerateFieldError):
        trotter_coupling(10.0, 64, -1.0)
    with pytest.raises(ValueError):
        trotter_coupling(-1.0, 64, 1.0)
    with pytest.raises(ValueError):
        trotter_coupling(1.0, 1, 1.0)


# ---------------------------------------------------------------------------
# estimators


def test_measure_mz_and_abs_hand_values():
    spins = np.array([[1, 1], [1, -1], [-1, -1], [1, 1]], dtype=np.int8)
    cfg = PathConfiguration(spins=spins)
    assert measure_mz(cfg) == pytest.approx(2 / 8)
    # per-slice means 0.5 and 0.0
    assert measure_mz_abs(cfg) == pytest.approx(0.25)


def test_measure_mx_matches_bond_loop():
    rng = np.random.default_rng(5)
    beta, tau, field = 3.0, 6, 0.8
    a = beta * field / tau
    for _ in range(5):
        cfg = PathConfiguration.random(3, tau, rng)
        total = 0.0
        for i in range(3):
            for t in range(tau):
                s, sp = cfg.spins[i, t], cfg.spins[i, (t + 1) % tau]
                total += math.tanh(a) if s == sp else 1.0 / math.tanh(a)
        expected = total / (3 * tau)
        assert measure_mx(cfg, beta, tau, field) == pytest.approx(expected, abs=1e-12)


def test_measure_mx_degenerate_field():
    cfg = PathConfiguration(spins=np.ones((2, 4), dtype=np.int8))
    with pytest.raises(DegenerateFieldError):
        measure_mx(cfg, 1.0, 4, 0.0)


def test_measure_energy_hand_value(bench8):
    model = NonStoqModel(classical=bench8, fluctuation=LinearQuadratic(Gamma=1.0, gamma=1.0))
    cfg = PathConfiguration(spins=np.ones((8, 4), dtype=np.int8))
    # all-up: H0 = -0.1*8 - 0.5*8 = -4.8 per slice
    e = measure_energy(cfg, model, 2.0, 4, 0.7, measured_mx=0.5)
    assert e == pytest.approx(-4.8 / 8 - (1.0 * 0.5 - 0.5 * 0.25))


# ---------------------------------------------------------------------------
# the sampler against the exact Trotterized distribution


TM_CASE = dict(n=2, tau=4, beta=2.0, field=0.7, h=0.1, j_ir=0.5)


def _tm_model():
    return NonStoqModel(
        classical=uniform_model(TM_CASE["n"], h=TM_CASE["h"], j_ir=TM_CASE["j_ir"]),
        fluctuation=Linear(Gamma=TM_CASE["field"]),
    )


def test_sampler_moments_match_transfer_matrix():
    tm = TransferMatrix(**TM_CASE)
    st = enumerate_spins(TM_CASE["n"])
    mz = st.sum(axis=1) / TM_CASE["n"]
    exact_mx = tm.mx_estimator()
    exact_mzabs = tm.diagonal_average(np.abs(mz))
    exact_e = tm.diagonal_average(tm.e0) / TM_CASE["n"] - TM_CASE["field"] * exact_mx

    params = MCParams(
        beta=TM_CASE["beta"],
        tau=TM_CASE["tau"],
        equilibration_sweeps=2000,
        measurement_sweeps=200000,
        seed=5,
    )
    rec = run_fixed_field(_tm_model(), TM_CASE["field"], params)
    assert rec.m_x == pytest.approx(exact_mx, abs=4 * rec.m_x_err)
    assert rec.m_z_abs == pytest.approx(exact_mzabs, abs=4 * rec.m_z_abs_err)
    assert rec.energy_per_spin == pytest.approx(exact_e, abs=4 * rec.energy_err)
    assert rec.m_z == pytest.approx(tm.diagonal_average(mz), abs=4 * rec.m_z_err)
    assert 0.0 < rec.acceptance_rate < 1.0


def test_sampler_path_distribution_chisquare():
    """Every one of the 256 closed paths is visited with its exact
    probability: chi-square over pooled cells."""
    n, tau = TM_CASE["n"], TM_CASE["tau"]
    tm = TransferMatrix(**TM_CASE)
    probs = tm.path_probabilities()
    model = _tm_model()
    B = trotter_coupling(TM_CASE["beta"], tau, TM_CASE["field"])

    rng = np.random.default_rng(42)
    config = PathConfiguration.random(n, tau, rng)
    for _ in range(2000):
        metropolis_sweep(config, model, TM_CASE["beta"], tau, B, rng)

    counts = {}
    stride, samples = 25, 40000
    bits = np.arange(n)
    for _ in range(samples):
        for _ in range(stride):
            metropolis_sweep(config, model, TM_CASE["beta"], tau, B, rng)
        key = tuple(int(((config.spins[:, t] < 0) << bits).sum()) for t in range(tau))
        counts[key] = counts.get(key, 0) + 1

    keys = sorted(probs)
    obs = np.array([counts.get(k, 0) for k in keys], dtype=float)
    exp = np.array([probs[k] for k in keys]) * samples
    order = np.argsort(exp)[::-1]
    obs, exp = obs[order], exp[order]
    cut = int(np.searchsorted(-exp, -5.0))  # pool cells with expectation < 5
    obs = np.concatenate([obs[:cut], [obs[cut:].sum()]])
    exp = np.concatenate([exp[:cut], [exp[cut:].sum()]])
    _, p = stats.chisquare(obs, exp)
    assert p > 0.01


def test_sweep_validates_inputs():
    model = _tm_model()
    rng = np.random.default_rng(0)
    cfg = PathConfiguration.random(2, 4, rng)
    with pytest.raises(ValueError):
        metropolis_sweep(cfg, model, 2.0, 8, 0.5, rng)  # tau mismatch
    with pytest.raises(ValueError):
        metropolis_sweep(cfg, model, 2.0, 4, -0.5, rng)


# ---------------------------------------------------------------------------
# fixed-field runs


def test_run_fixed_field_deterministic(bench8, fast_params):
    model = NonStoqModel(classical=bench8, fluctuation=Linear(Gamma=1.0))
    a = run_fixed_field(model, 1.0, fast_params)
    b = run_fixed_field(model, 1.0, fast_params)
    assert a == b
    c = run_fixed_field(model, 1.0, fast_params.__class__(**{**fast_params.__dict__, "seed": 99}))
    assert c.m_x != a.m_x


def test_run_fixed_field_record_metadata(bench8, fast_params):
    model = NonStoqModel(classical=bench8, fluctuation=Linear(Gamma=1.0))
    rec = run_fixed_field(model, 1.0, fast_params)
    assert rec.n_spins == 8
    assert rec.beta == fast_params.beta
    assert rec.tau == fast_params.tau
    assert rec.effective_field == 1.0
    assert rec.seed == "1234"
    assert rec.sweeps_equil == fast_params.equilibration_sweeps
    assert rec.sweeps_meas == fast_params.measurement_sweeps


def test_run_fixed_field_too_few_samples(bench8):
    model = NonStoqModel(classical=bench8, fluctuation=Linear(Gamma=1.0))
    params = MCParams(beta=1.0, tau=8, equilibration_sweeps=0, measurement_sweeps=5, seed=0, measure_interval=5)
    with pytest.raises(InsufficientStatisticsError):
        run_fixed_field(model, 1.0, params)


def test_measure_interval_thins_samples(bench8):
    model = NonStoqModel(classical=bench8, fluctuation=Linear(Gamma=1.0))
    p1 = MCParams(beta=2.0, tau=8, equilibration_sweeps=100, measurement_sweeps=2000, seed=5, measure_interval=4)
    rec = run_fixed_field(model, 1.0, p1)
    assert rec.sweeps_meas == 2000
    assert np.isfinite(rec.m_x_err) and rec.m_x_err > 0


def test_classical_branch_samples_classical_gibbs():
    """Effective field <= 0 collapses the path to lockstep slices sampled
    from exp(-beta*H0); m_x is identically zero."""
    n, beta = 4, 2.0
    model = NonStoqModel(classical=uniform_model(n), fluctuation=LinearQuadratic(Gamma=0.0, gamma=1.0))
    params = MCParams(beta=beta, tau=8, equilibration_sweeps=1000, measurement_sweeps=40000, seed=9)
    rec = run_fixed_field(model, 0.0, params)

    states = enumerate_spins(n)
    e0 = classical_energies(states, 0.1, 0.5)
    w = np.exp(-beta * (e0 - e0.min()))
    w /= w.sum()
    mzabs_exact = float(w @ np.abs(states.sum(axis=1) / n))
    e_exact = float(w @ e0) / n

    assert rec.m_x == 0.0 and rec.m_x_err == 0.0
    assert rec.m_z_abs == pytest.approx(mzabs_exact, abs=4 * rec.m_z_abs_err)
    assert rec.energy_per_spin == pytest.approx(e_exact, abs=4 * rec.energy_err)


def test_negative_field_also_classical(bench8):
    model = NonStoqModel(classical=bench8, fluctuation=LinearQuadratic(Gamma=0.0, gamma=1.0))
    params = MCParams(beta=2.0, tau=8, equilibration_sweeps=50, measurement_sweeps=500, seed=2)
    rec = run_fixed_field(model, -0.3, params)
    assert rec.m_x == 0.0


# ---------------------------------------------------------------------------
# replica exchange


def test_replica_none_interval_equals_independent_runs(bench8):
    model = NonStoqModel(classical=bench8, fluctuation=Linear(Gamma=1.0))
    params = MCParams(beta=4.0, tau=16, equilibration_sweeps=200, measurement_sweeps=2000, seed=11)
    ladder = [0.5, 1.0, 2.0]
    res = replica_exchange_run(model, ladder, params, swap_interval=None)
    assert isinstance(res, ReplicaResult)
    for k, g in enumerate(ladder):
        solo = run_fixed_field(model, g, MCParams(
            beta=4.0, tau=16, equilibration_sweeps=200, measurement_sweeps=2000, seed=(11, k)))
        assert res.records[k] == solo
    assert np.all(res.swap_acceptance == 0.0)


def test_replica_swaps_preserve_stationarity():
    """With swaps on, each rung must still reproduce the exact Trotterized
    expectations of its own field."""
    n, tau, beta = 2, 4, 2.0
    model = NonStoqModel(classical=uniform_model(n), fluctuation=Linear(Gamma=1.0))
    ladder = [0.4, 0.7, 1.1]
    params = MCParams(beta=beta, tau=tau, equilibration_sweeps=2000, measurement_sweeps=150000, seed=17)
    res = replica_exchange_run(model, ladder, params, swap_interval=10)
    assert np.all(res.swap_acceptance > 0.0)
    for rec, g in zip(res.records, ladder):
        tm = TransferMatrix(n, tau, beta, g, 0.1, 0.5)
        assert rec.m_x == pytest.approx(tm.mx_estimator(), abs=5 * rec.m_x_err)
        st = enumerate_spins(n)
        mzabs = tm.diagonal_average(np.abs(st.sum(axis=1) / n))
        assert rec.m_z_abs == pytest.approx(mzabs, abs=5 * rec.m_z_abs_err)


def test_replica_ladder_validation(bench8):
    model = NonStoqModel(classical=bench8, fluctuation=Linear(Gamma=1.0))
    params = MCParams(beta=2.0, tau=8, equilibration_sweeps=10, measurement_sweeps=100, seed=0)
    with pytest.raises(ValueError):
        replica_exchange_run(model, [1.0], params)
    with pytest.raises(ValueError):
        replica_exchange_run(model, [2.0, 1.0], params)
    with pytest.raises(ValueError):
        replica_exchange_run(model, [0.0, 1.0], params)
    with pytest.raises(ValueError):
        replica_exchange_run(model, [0.5, 1.0], params, swap_interval=0)


def test_replica_swap_interval_multiple_of_measure_interval(bench8):
    model = NonStoqModel(classical=bench8, fluctuation=Linear(Gamma=1.0))
    params = MCParams(beta=2.0, tau=8, equilibration_sweeps=10, measurement_sweeps=100, seed=0, measure_interval=4)
    with pytest.raises(ValueError):
        replica_exchange_run(model, [0.5, 1.0], params, swap_interval=6)
    replica_exchange_run(model, [0.5, 1.0], params, swap_interval=8)
