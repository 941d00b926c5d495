import numpy as np
import pytest
from hypothesis import given, strategies as st

from dopocim.reservoirs import ReservoirSpec, quadrature_variances, sample_noise_field
from dopocim.streams import derive_stream


def test_vacuum_variances():
    assert quadrature_variances(ReservoirSpec.vacuum()) == (0.25, 0.25)
    assert quadrature_variances(ReservoirSpec.squeezed(0.0)) == (0.25, 0.25)
    assert quadrature_variances(ReservoirSpec.thermal(0.0)) == (0.25, 0.25)


def test_squeezed_variances():
    vx, vp = quadrature_variances(ReservoirSpec.squeezed(1.2))
    assert vx == pytest.approx(np.exp(-2.4) / 4)  # ~0.0226696
    assert vp == pytest.approx(np.exp(2.4) / 4)  # ~2.7557
    assert vx * vp == pytest.approx(1 / 16)


def test_thermal_variances():
    assert quadrature_variances(ReservoirSpec.thermal(1.0)) == (0.75, 0.75)


def test_invalid_specs():
    with pytest.raises(ValueError):
        ReservoirSpec.thermal(-0.5)
    with pytest.raises(ValueError):
        ReservoirSpec("boson")
    with pytest.raises(ValueError):
        ReservoirSpec("vacuum", n_th=1.0)


@given(st.floats(-3.0, 3.0), st.floats(0.0, 100.0))
def test_heisenberg_floor(r, n_th):
    vx, vp = quadrature_variances(ReservoirSpec.squeezed(r))
    assert vx * vp >= 1 / 16 - 1e-12
    vx, vp = quadrature_variances(ReservoirSpec.thermal(n_th))
    assert vx * vp >= 1 / 16 - 1e-12


@given(st.floats(0.0, 2.9), st.floats(0.0, 99.0))
def test_monotonicity(r, n_th):
    assert quadrature_variances(ReservoirSpec.squeezed(r + 0.1))[0] < quadrature_variances(ReservoirSpec.squeezed(r))[0]
    assert quadrature_variances(ReservoirSpec.thermal(n_th + 1.0))[0] > quadrature_variances(ReservoirSpec.thermal(n_th))[0]


def test_vacuum_sampling_variance():
    f = sample_noise_field(ReservoirSpec.vacuum(), derive_stream(1, 0, "f1"), size=1_000_000)
    assert f.real.var() == pytest.approx(0.25, rel=0.01)
    assert f.imag.var() == pytest.approx(0.25, rel=0.01)


def test_squeezed_sampling_uncertainty_product():
    f = sample_noise_field(ReservoirSpec.squeezed(1.2), derive_stream(1, 0, "f1"), size=400_000)
    assert f.real.var() * f.imag.var() == pytest.approx(1 / 16, rel=0.02)


def test_thermal_sampling_photon_number():
    f = sample_noise_field(ReservoirSpec.thermal(10.0), derive_stream(2, 0, "f1"), size=400_000)
    assert (np.abs(f) ** 2).mean() - 0.5 == pytest.approx(10.0, rel=0.02)


def test_scalar_draw():
    f = sample_noise_field(ReservoirSpec.vacuum(), derive_stream(2, 1, "f2"))
    assert isinstance(f, complex)
