import numpy as np
import pytest

from dopocim.continuous import ContinuousParams, PumpSchedule
from dopocim.ensemble import (
    ContinuousModel,
    DiscreteModel,
    EnsembleConfig,
    resolve_workers,
    run_ensemble,
    standard_error,
)
from dopocim.discrete import DiscreteParams, ring_coupling
from dopocim.integrate import IntegratorConfig
from dopocim.observables import variance_x, wigner_quadratures


def _w2_config(n=400, seed=11, xi=0.6, e=0.0, total=5.0, observables=("epr_pair",), **kw):
    params = ContinuousParams(g=0.01, xi=xi, pump=PumpSchedule.constant(e))
    model = ContinuousModel("wigner_two", params, IntegratorConfig.regular(1e-3, total, 1.0))
    return EnsembleConfig(model, n, seed, observables, **kw)


def test_noiseless_model_has_zero_error():
    # the doubled-phase-space pair at E = 0 has zero drift and zero noise
    params = ContinuousParams(g=0.01, xi=0.3, pump=PumpSchedule.constant(0.0))
    model = ContinuousModel("positive_p_two", params, IntegratorConfig.regular(1e-3, 1.0, 1.0))
    series = run_ensemble(EnsembleConfig(model, 2, 1, ("epr_pair",)), workers=1)
    assert series.series["epr_sum"] == pytest.approx([1.0, 1.0])
    assert series.series["epr_sum_se"] == pytest.approx([0.0, 0.0])


def test_worker_count_does_not_change_results():
    cfg = _w2_config(n=700, observables=("epr_pair", "photon", "configs"))
    a = run_ensemble(cfg, workers=1)
    b = run_ensemble(cfg, workers=3)
    for key in a.series:
        assert np.array_equal(a.series[key], b.series[key])
    assert np.array_equal(a.final_states, b.final_states)
    assert np.array_equal(a.config_series, b.config_series)
    assert np.array_equal(a.diverged, b.diverged)


def test_reruns_are_bit_identical():
    cfg = _w2_config(n=300)
    a = run_ensemble(cfg, workers=2)
    b = run_ensemble(cfg, workers=2)
    assert np.array_equal(a.series["epr_sum"], b.series["epr_sum"])


def test_divergence_exclusion_and_flag():
    # a cap below the vacuum spread flags a deterministic subset of paths
    cfg = _w2_config(n=500, total=3.0, divergence_cap=0.012)
    with pytest.warns(UserWarning, match="diverged"):
        series = run_ensemble(cfg, workers=1)
    assert series.divergent_count > 5
    assert series.survivor_count + series.divergent_count == 500
    assert series.unreliable
    assert np.isfinite(series.series["epr_sum"]).all()


def test_every_trajectory_divergent_raises():
    cfg = _w2_config(n=50, total=2.0, divergence_cap=1e-6)
    with pytest.warns(UserWarning):
        with pytest.raises(RuntimeError):
            run_ensemble(cfg, workers=1)


def test_standard_error_kinds():
    const = np.full(100, 2.5)
    assert standard_error(const, "variance") == 0.0
    assert standard_error(const, "mean") == 0.0
    rng = np.random.default_rng(0)
    bern = rng.integers(0, 2, size=10_000).astype(float)
    assert standard_error(bern, "probability") == pytest.approx(0.005, rel=0.02)
    x = rng.standard_normal(4000)
    assert standard_error(x, "mean") == pytest.approx(x.std(ddof=1) / np.sqrt(4000), rel=1e-9)
    se1 = standard_error(x[:2000], "variance")
    se2 = standard_error(np.concatenate([x, rng.standard_normal(4000)]), "variance")
    assert se2 == pytest.approx(se1 / 2, rel=0.35)  # SE shrinks like 1/sqrt(n)
    with pytest.raises(ValueError):
        standard_error(x, "median")


def test_se_honesty_on_stationary_cavity():
    # true stationary quadrature variance 1/4 lies within 2 SE of the
    # estimate for at least 90% of master seeds
    hits = 0
    for seed in range(20):
        cfg = _w2_config(n=400, seed=seed, xi=0.0, total=2.0, observables=("quad:0",))
        series = run_ensemble(cfg, workers=2)
        v = series.series["var_x"][-1]
        se = series.series["var_x_se"][-1]
        hits += abs(v - 0.25) <= 2 * se
    assert hits >= 18


def test_final_configs_and_quadratures():
    cfg = _w2_config(n=200, e=0.8, total=30.0, observables=("configs",))
    series = run_ensemble(cfg, workers=2)
    codes = series.final_configs
    assert codes.shape == (series.survivor_count,)
    # above threshold with antiferro coupling the pair anti-aligns
    frac_anti = np.isin(codes, (1, 2)).mean()
    assert frac_anti > 0.9
    q = wigner_quadratures(series.final_states[series.diverged < 0], 0.01)
    v, se = variance_x(q, 0)
    assert v > 10  # macroscopic amplitude (in photon-normalised units)


def test_config_validation():
    with pytest.raises(ValueError):
        _w2_config(n=1)
    with pytest.raises(ValueError):
        _w2_config(observables=("nonsense",))
    params = ContinuousParams(g=0.01, xi=0.2, pump=PumpSchedule.constant(0.0))
    ring5 = ContinuousModel("wigner_ring", params, IntegratorConfig.regular(1e-3, 1.0, 1.0), n_modes=5)
    with pytest.raises(ValueError):
        EnsembleConfig(ring5, 10, 1, ("epr_ring",))  # collective criterion needs even N
    with pytest.raises(ValueError):
        ContinuousModel("wigner_ring", params, IntegratorConfig.regular(1e-3, 1.0, 1.0), n_modes=2)
    dp = DiscreteParams(4, 0.05, ring_coupling(4), rounds=10)
    with pytest.raises(ValueError):
        DiscreteModel(dp, (0, 5))  # final round missing
    with pytest.raises(ValueError):
        EnsembleConfig(DiscreteModel(dp, (0, 10)), 10, 1, ("upair_var",))  # no pair set


def test_resolve_workers(monkeypatch):
    assert resolve_workers(3) == 3
    monkeypatch.setenv("DOPOCIM_WORKERS", "5")
    assert resolve_workers() == 5
    monkeypatch.delenv("DOPOCIM_WORKERS")
    assert resolve_workers() >= 1
    with pytest.raises(ValueError):
        resolve_workers(0)


def test_discrete_ensemble_round_series():
    dp = DiscreteParams(8, 0.05, ring_coupling(8), rounds=150)
    model = DiscreteModel(dp, (0, 75, 150), upair_modes=(0, 1))
    cfg = EnsembleConfig(model, 300, 3, ("photon", "configs", "upair_var"))
    series = run_ensemble(cfg, workers=2)
    assert series.round_series["upair_var"].shape == (150,)
    assert series.series["photon"].shape == (3,)
    assert series.config_series.shape == (300, 3)
    # vacuum start: u-pair variance begins near 2 * 1/4
    assert series.round_series["upair_var"][0] == pytest.approx(0.5, rel=0.4)
