import numpy as np
import pytest

from dopocim.streams import (
    RngStream,
    WienerConvention,
    derive_stream,
    sample_complex_wiener,
    sample_real_wiener,
)
from dopocim.reservoirs import ReservoirSpec


def test_same_identity_is_bit_identical():
    a = derive_stream(42, 0, "s1").generator.standard_normal(100)
    b = derive_stream(42, 0, "s1").generator.standard_normal(100)
    assert np.array_equal(a, b)


def test_trajectory_indices_give_independent_streams():
    x = derive_stream(42, 0, "s1").generator.standard_normal(1_000_000)
    y = derive_stream(42, 1, "s1").generator.standard_normal(1_000_000)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.01


def test_seed_changes_sequence():
    a = derive_stream(42, 0, "s1").generator.standard_normal(16)
    b = derive_stream(43, 0, "s1").generator.standard_normal(16)
    assert not np.array_equal(a, b)


def test_label_changes_sequence():
    a = derive_stream(7, 3, "p2").generator.standard_normal(16)
    b = derive_stream(7, 3, "c3").generator.standard_normal(16)
    assert not np.array_equal(a, b)


def test_bad_identifiers_rejected():
    with pytest.raises(ValueError):
        derive_stream(-1, 0, "s1")
    with pytest.raises(ValueError):
        derive_stream(2**64, 0, "s1")
    with pytest.raises(ValueError):
        derive_stream(1, -2, "s1")
    with pytest.raises(ValueError):
        derive_stream(1, 0, "")


def test_stream_fields():
    s = derive_stream(5, 2, "f5")
    assert isinstance(s, RngStream)
    assert (s.master_seed, s.trajectory_index, s.stream_label) == (5, 2, "f5")


def test_wiener_default_variance():
    conv = WienerConvention(dt=0.01)
    dw = sample_complex_wiener(conv, derive_stream(1, 0, "w"), size=1_000_000)
    assert dw.real.var() == pytest.approx(0.005, rel=0.01)
    assert dw.imag.var() == pytest.approx(0.005, rel=0.01)
    assert abs(dw.mean()) < 3e-4


def test_wiener_squeezed_scaling():
    r = 1.2
    conv = WienerConvention(dt=0.01, quad_var_scale_x=np.exp(-2 * r), quad_var_scale_p=np.exp(2 * r))
    dw = sample_complex_wiener(conv, derive_stream(1, 0, "w"), size=500_000)
    assert dw.real.var() == pytest.approx(0.005 * np.exp(-2.4), rel=0.02)
    assert dw.imag.var() == pytest.approx(0.005 * np.exp(2.4), rel=0.02)


def test_wiener_zero_scales_degenerate():
    conv = WienerConvention(dt=0.01, quad_var_scale_x=0.0, quad_var_scale_p=0.0)
    dw = sample_complex_wiener(conv, derive_stream(1, 0, "w"), size=100)
    assert np.all(dw == 0)


def test_wiener_scalar_draw_and_validation():
    conv = WienerConvention(dt=0.25)
    assert isinstance(sample_complex_wiener(conv, derive_stream(0, 0, "x")), complex)
    with pytest.raises(ValueError):
        WienerConvention(dt=0.0)
    with pytest.raises(ValueError):
        WienerConvention(dt=1.0, quad_var_scale_x=-1.0)


def test_convention_for_reservoir():
    conv = WienerConvention.for_reservoir(ReservoirSpec.vacuum(), dt=0.01)
    assert conv.quad_var_scale_x == conv.quad_var_scale_p == 1.0
    conv = WienerConvention.for_reservoir(ReservoirSpec.squeezed(0.5), dt=0.01)
    assert conv.quad_var_scale_x == pytest.approx(np.exp(-1.0))
    assert conv.quad_var_scale_p == pytest.approx(np.exp(1.0))
    conv = WienerConvention.for_reservoir(ReservoirSpec.thermal(1.0), dt=0.01)
    assert conv.quad_var_scale_x == pytest.approx(3.0)


def test_real_wiener_variance():
    dw = sample_real_wiener(0.02, derive_stream(3, 0, "r"), size=500_000)
    assert dw.var() == pytest.approx(0.02, rel=0.01)
    with pytest.raises(ValueError):
        sample_real_wiener(0.0, derive_stream(3, 0, "r"))
