"""Cross-backend equivalence: the compiled kernels and the numpy fallback
consume identical random streams and must produce the same paths.

Comparisons run over short horizons where floating-point noise cannot be
amplified by the nonlinear dynamics; agreement there plus the shared stream
contract implies statistical equivalence everywhere.
"""

import numpy as np
import pytest

from dopocim._backend import kernels
from dopocim.continuous import sample_initial_state
from dopocim.discrete import ring_coupling
from dopocim.streams import derive_stream

try:
    KC = kernels("c")
    HAVE_C = True
except RuntimeError:
    HAVE_C = False

KP = kernels("python")

pytestmark = pytest.mark.skipif(not HAVE_C, reason="compiled kernels not built")


def _gens(seed, n):
    return [derive_stream(seed, i, "path").generator for i in range(n)]


def _a0(seed, n, modes, g):
    return np.array(
        [sample_initial_state("wigner", modes, g, derive_stream(seed, i, "init")) for i in range(n)]
    )


S = 2500
E_RAMP = 1.5 * np.arange(S) / 200_000.0
SAMPLES = np.arange(0, S + 1, 250, dtype=np.int64)


def _compare(res_c, res_p, atol=1e-8):
    for a, b in zip(res_c, res_p):
        if a is None:
            assert b is None
            continue
        mask = np.isnan(np.asarray(a, dtype=complex))
        assert np.array_equal(mask, np.isnan(np.asarray(b, dtype=complex)))
        assert np.allclose(a, b, rtol=0.0, atol=atol, equal_nan=True)


@pytest.mark.parametrize("xi", [0.6, 0.0])
def test_wigner_two_lockstep(xi):
    args = (E_RAMP, xi, 0.01, 1e-3, 1.0, 1.0, -1.0, SAMPLES, 1e3)
    a0 = _a0(1, 12, 2, 0.01)
    _compare(
        KC.run_wigner_two(_gens(1, 12), a0, *args),
        KP.run_wigner_two(_gens(1, 12), a0, *args),
    )


def test_wigner_ring_lockstep():
    args = (E_RAMP, 0.4, 0.01, 1e-3, np.exp(-2.0), np.exp(2.0), -1.0, SAMPLES, 1e3)
    a0 = _a0(2, 6, 16, 0.01)
    _compare(
        KC.run_wigner_ring(_gens(2, 6), a0, *args),
        KP.run_wigner_ring(_gens(2, 6), a0, *args),
    )


def test_positive_p_two_lockstep():
    args = (E_RAMP, 0.6, 0.01, 1e-3, -1.0, SAMPLES, 1e3)
    a0 = np.zeros((12, 4), complex)
    _compare(
        KC.run_positive_p_two(_gens(3, 12), a0, *args),
        KP.run_positive_p_two(_gens(3, 12), a0, *args),
    )


def test_full_model_lockstep():
    eps = np.full(S, 25.0)
    a0 = _a0(4, 6, 5, 1.0)
    args = (eps, 0.4, 100.0, 100.0, 0.1414, 6.324, -1.0, 1e-5, 1.0, 1.0, SAMPLES, 1e4)
    _compare(
        KC.run_wigner_five(_gens(4, 6), a0, *args),
        KP.run_wigner_five(_gens(4, 6), a0, *args),
    )
    a0 = np.zeros((6, 10), complex)
    args = (eps, 0.4, 100.0, 100.0, 0.1414, 6.324, -1.0, 1e-5, SAMPLES, 1e4)
    _compare(
        KC.run_positive_p_full(_gens(5, 6), a0, *args),
        KP.run_positive_p_full(_gens(5, 6), a0, *args),
    )


@pytest.mark.parametrize("inject_first", [False, True])
def test_discrete_lockstep(inject_first):
    cpl = ring_coupling(16)
    a0 = _a0(6, 8, 16, 0.01)
    rounds = 400
    samp = np.arange(0, rounds + 1, 50, dtype=np.int64)
    args = (0.04, 0.01, 0.1, 1e-4, 2, inject_first, 0.25, 0.25, cpl, rounds, samp, 0, 1, 1.0, 1e3)
    _compare(
        KC.run_discrete(_gens(6, 8), a0, *args),
        KP.run_discrete(_gens(6, 8), a0, *args),
    )


def test_divergence_flags_match():
    # a tiny cap flags paths at the same sample step in both backends
    args = (E_RAMP, 0.6, 0.01, 1e-3, 1.0, 1.0, -1.0, SAMPLES, 0.012)
    a0 = _a0(7, 64, 2, 0.01)
    sc, dc = KC.run_wigner_two(_gens(7, 64), a0, *args)
    sp, dp = KP.run_wigner_two(_gens(7, 64), a0, *args)
    assert np.array_equal(dc, dp)
    assert (dc >= 0).any()
