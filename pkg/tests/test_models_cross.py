"""Cross-validation of the eliminated models against the un-eliminated ones.

With fast pump and coupling modes (rate ratio 100) the five-mode and
ten-variable models must reproduce the eliminated pair equations' ensemble
statistics; and the two phase-space representations must agree with each
other.  All comparisons are at the three-combined-standard-error level.
"""

import numpy as np
import pytest

from dopocim.continuous import ContinuousParams, FullModelRates, PumpSchedule
from dopocim.ensemble import ContinuousModel, EnsembleConfig, run_ensemble
from dopocim.integrate import IntegratorConfig

XI = 0.6
G = 0.01
RATIO = 100.0
TMAX = 10.0
RAMP = PumpSchedule.linear_ramp(1.0, TMAX)  # crosses threshold 1 - xi = 0.4 at tau = 4


def _run(kind, n, seed, dt, rates=None):
    params = ContinuousParams(g=G, xi=XI, pump=RAMP, full_rates=rates)
    model = ContinuousModel(kind, params, IntegratorConfig.regular(dt, TMAX, 2.0))
    cfg = EnsembleConfig(model, n, seed, ("epr_pair", "photon"))
    return run_ensemble(cfg)


@pytest.fixture(scope="module")
def rates():
    return FullModelRates.from_normalized(G, XI, RATIO)


@pytest.fixture(scope="module")
def eliminated_wigner():
    return _run("wigner_two", 4000, 91, 1e-3)


@pytest.fixture(scope="module")
def eliminated_pp():
    return _run("positive_p_two", 4000, 92, 1e-3)


def _assert_within_3se(a, b, skip_first=True):
    lo = 1 if skip_first else 0
    for key in ("epr_sum", "photon"):
        va, sa = a.series[key][lo:], a.series[key + "_se"][lo:]
        vb, sb = b.series[key][lo:], b.series[key + "_se"][lo:]
        gap = np.abs(va - vb)
        combined = np.sqrt(sa**2 + sb**2)
        assert np.all(gap <= 3 * combined + 1e-12), f"{key}: {gap / combined}"


def test_five_mode_reproduces_eliminated_wigner(rates, eliminated_wigner):
    full = _run("wigner_five", 500, 93, 1e-5, rates)
    assert full.divergent_count == 0
    _assert_within_3se(full, eliminated_wigner)


def test_ten_variable_reproduces_eliminated_positive_p(rates, eliminated_pp):
    full = _run("positive_p_full", 500, 94, 1e-5, rates)
    assert full.divergent_count == 0
    _assert_within_3se(full, eliminated_pp)


def test_representations_agree(eliminated_wigner, eliminated_pp):
    _assert_within_3se(eliminated_wigner, eliminated_pp)


def test_wigner_two_threshold_property():
    # below the coupled threshold the photon number stays microscopic; above
    # it the saturated amplitude approaches E - (1 - xi)
    for e, above in ((0.3, False), (0.5, True)):
        params = ContinuousParams(g=G, xi=XI, pump=PumpSchedule.constant(e))
        model = ContinuousModel("wigner_two", params, IntegratorConfig.regular(1e-3, 60.0, 10.0))
        series = run_ensemble(EnsembleConfig(model, 400, 95, ("epr_pair", "photon", "configs")))
        n_final = series.series["photon"][-1] * G**2  # |A|^2 scale
        if above:
            assert n_final == pytest.approx(e - (1 - XI), rel=0.2)
            # anti-ferromagnetic phase: the pair anti-aligns
            assert np.isin(series.final_configs, (1, 2)).mean() > 0.9
        else:
            assert n_final < 20 * G**2


def test_solitary_linearized_variances():
    # stationary quadrature variances of an uncoupled DOPO at E = 0.5:
    # 1/(4(1-E)) = 0.5 in phase, 1/(4(1+E)) = 1/6 out of phase
    params = ContinuousParams(g=G, xi=0.0, pump=PumpSchedule.constant(0.5))
    model = ContinuousModel("wigner_two", params, IntegratorConfig.regular(1e-3, 15.0, 3.0))
    series = run_ensemble(EnsembleConfig(model, 3000, 96, ("quad:0",)))
    assert series.series["var_x"][-1] == pytest.approx(0.5, rel=0.05)
    assert series.series["var_p"][-1] == pytest.approx(1.0 / 6.0, rel=0.05)
