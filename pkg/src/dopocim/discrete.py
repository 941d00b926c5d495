"""Round-trip model of a fiber-ring CIM with optical delay-line coupling.

Pulse amplitudes circulate in a common cavity; each round trip applies, in
order: noise-field draw and phase-sensitive readout at the output coupler,
out-coupling, parametric gain, and injection of the synthesised feedback
pulse.  Amplitudes are kept in units normalised by the gain-noise parameter
``mu`` (A = mu * alpha), so the raw reservoir field is scaled by mu where it
enters the cavity; photon numbers and quadratures divide the state by mu to
return to physical units in which the vacuum quadrature variance is 1/4.

The only open-port noise source is the field incident on the output coupler.
The injection coupler is treated as noiseless: the feedback pulse is a
macroscopic coherent state whose quantum noise is suppressed by the
transmission T_i << 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .reservoirs import ReservoirSpec, quadrature_variances, sample_noise_field
from .streams import RngStream, WienerConvention, sample_complex_wiener

__all__ = [
    "DiscreteParams",
    "RoundTripRecord",
    "ThresholdEstimate",
    "ring_coupling",
    "dopa_step",
    "out_couple",
    "psa_readout",
    "feedback_amplitude",
    "inject",
    "round_trip",
    "estimate_threshold",
]


def ring_coupling(n: int, xi_ring: float = -0.01) -> np.ndarray:
    """Nearest-neighbour ring coupling matrix (anti-ferromagnetic for xi < 0)."""
    j = np.zeros((n, n))
    idx = np.arange(n)
    j[idx, (idx + 1) % n] = xi_ring
    j[idx, (idx - 1) % n] = xi_ring
    return j


@dataclass(frozen=True)
class DiscreteParams:
    """Machine parameters for the round-trip map."""

    n_pulses: int
    pump_e: float
    coupling: np.ndarray
    mu: float = 0.01
    t_out: float = 0.1  # power transmission of the output coupler
    t_inj: float = 1e-4  # power transmission of the injection coupler
    psa_gain: float = 1.0
    reservoir: ReservoirSpec = field(default_factory=ReservoirSpec.vacuum)
    rounds: int = 2000
    substeps: int = 1  # gain sub-steps per round trip
    inject_before_gain: bool = False

    def __post_init__(self):
        if self.n_pulses < 1:
            raise ValueError("need at least one pulse")
        if self.pump_e < 0:
            raise ValueError("pump rate must be nonnegative")
        if not 0.0 < self.t_out <= 1.0:
            raise ValueError(f"output coupler transmission must be in (0, 1], got {self.t_out}")
        if not 0.0 < self.t_inj < 1.0:
            raise ValueError(f"injection coupler transmission must be in (0, 1), got {self.t_inj}")
        if self.t_inj > 0.1:
            warnings.warn(f"injection transmission t_inj={self.t_inj} is unusually large")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.psa_gain < 1.0:
            raise ValueError("PSA gain must be >= 1")
        if self.rounds < 1 or self.substeps < 1:
            raise ValueError("rounds and substeps must be positive")
        c = np.asarray(self.coupling, dtype=float)
        if c.shape != (self.n_pulses, self.n_pulses):
            raise ValueError(f"coupling matrix must be {self.n_pulses}x{self.n_pulses}")
        if np.any(np.diag(c) != 0.0):
            raise ValueError("coupling matrix diagonal must be zero")
        object.__setattr__(self, "coupling", c)


@dataclass
class RoundTripRecord:
    """Per-round measurement record of one trajectory."""

    measurements: np.ndarray  # normalised PSA readouts c~_j
    out_fields: np.ndarray  # out-coupled amplitudes
    photon_numbers: np.ndarray  # per-pulse <n> estimate |A/mu|^2 - 1/2
    spins: np.ndarray  # sign of the in-phase amplitudes


def dopa_step(train: np.ndarray, params: DiscreteParams, stream: RngStream) -> np.ndarray:
    """One round trip of parametric gain: dA = (E - A^2) A* dT + sqrt(2) mu A* dW.

    The amplitude A = 0 is a fixed point of the map: the pump noise enters
    multiplicatively through A*.  ``substeps`` splits the unit round-trip time
    into m Euler sub-steps with noise scaled accordingly.
    """
    a = np.asarray(train, dtype=complex).copy()
    m = params.substeps
    dt = 1.0 / m
    conv = WienerConvention(dt)
    for _ in range(m):
        dw = sample_complex_wiener(conv, stream, size=a.shape)
        a = a + (params.pump_e - a * a) * np.conj(a) * dt + np.sqrt(2.0) * params.mu * np.conj(a) * dw
    return a


def out_couple(a_cav, f, t_out: float):
    """Beamsplitter relation of the output coupler.

    Returns ``(a_out, a_cav_after)`` with
    a_out = sqrt(T) a_cav - sqrt(1-T) f and a_cav' = sqrt(1-T) a_cav + sqrt(T) f.
    """
    if not 0.0 < t_out <= 1.0:
        raise ValueError(f"transmission must be in (0, 1], got {t_out}")
    st, sr = np.sqrt(t_out), np.sqrt(1.0 - t_out)
    return st * a_cav - sr * f, sr * a_cav + st * f


def psa_readout(a_cav_before, f, t_out: float, gain: float = 1.0):
    """Phase-sensitive readout of the out-coupled field.

    Returns ``(c_out, c_tilde)``: the amplified in-phase amplitude
    c_out = G Re(sqrt(T) a_cav - sqrt(1-T) f) and its machine-normalised form
    c~ = c_out / (G sqrt(T)), which is independent of the PSA gain.  The same
    noise draw ``f`` must feed the matching out_couple call: readout and
    out-coupling are one physical event.
    """
    st, sr = np.sqrt(t_out), np.sqrt(1.0 - t_out)
    c_out = gain * np.real(st * a_cav_before - sr * f)
    return c_out, c_out / (gain * st)


def feedback_amplitude(measurements, coupling_row, t_inj: float):
    """Feedback pulse amplitude for one target: (1/sqrt(T_i)) sum_j xi_ij c~_j."""
    return complex(np.dot(coupling_row, measurements) / np.sqrt(t_inj))


def inject(a_cav, alpha_fb, t_inj: float):
    """Injection coupler: a_cav' = sqrt(1-T_i) a_cav + sqrt(T_i) alpha_FB.

    No vacuum noise is added; composed with feedback_amplitude the injected
    term is exactly sum_j xi_ij c~_j, independent of T_i.
    """
    if not 0.0 < t_inj < 1.0:
        raise ValueError(f"transmission must be in (0, 1), got {t_inj}")
    return np.sqrt(1.0 - t_inj) * a_cav + np.sqrt(t_inj) * alpha_fb


def round_trip(
    train: np.ndarray,
    params: DiscreteParams,
    noise_stream: RngStream,
    gain_stream: RngStream,
) -> tuple[np.ndarray, RoundTripRecord]:
    """Advance the pulse train by one full round trip.

    Per pulse: draw the open-port field f, record the PSA readout, apply the
    output coupler and the parametric gain; then synthesise all feedback
    amplitudes from this round's measurements and inject them.  The same f
    draw feeds both the readout and the out-coupling.
    """
    a = np.asarray(train, dtype=complex)
    f = params.mu * np.asarray(sample_noise_field(params.reservoir, noise_stream, size=a.shape))
    c_out, c_tilde = psa_readout(a, f, params.t_out, params.psa_gain)
    a_out, a = out_couple(a, f, params.t_out)
    if params.inject_before_gain:
        a = _inject_all(a, c_tilde, params)
        a = dopa_step(a, params, gain_stream)
    else:
        a = dopa_step(a, params, gain_stream)
        a = _inject_all(a, c_tilde, params)
    record = RoundTripRecord(
        measurements=np.real(c_tilde),
        out_fields=a_out,
        photon_numbers=np.abs(a / params.mu) ** 2 - 0.5,
        spins=np.where(np.real(a) >= 0.0, 1, -1).astype(np.int8),
    )
    return a, record


def _inject_all(a: np.ndarray, c_tilde: np.ndarray, params: DiscreteParams) -> np.ndarray:
    fb = params.coupling @ np.real(c_tilde) / np.sqrt(params.t_inj)
    return inject(a, fb, params.t_inj)


@dataclass(frozen=True)
class ThresholdEstimate:
    value: float
    grid_index: int
    unique: bool
    slopes: np.ndarray


def estimate_threshold(pump_grid, photon_numbers, refine: bool = True) -> ThresholdEstimate:
    """Oscillation threshold from a photon-number scan.

    The threshold is the pump value maximising d log<n> / d log eps,
    computed with central differences on the interior grid points and
    optionally refined by a parabolic fit around the maximum.  Doubling all
    photon numbers leaves the estimate unchanged.
    """
    eps = np.asarray(pump_grid, dtype=float)
    n = np.asarray(photon_numbers, dtype=float)
    if eps.ndim != 1 or eps.shape != n.shape or eps.size < 5:
        raise ValueError("need matching 1-D grids with at least 5 points")
    if np.any(np.diff(eps) <= 0):
        raise ValueError("pump grid must be strictly increasing")
    if np.any(n <= 0):
        raise ValueError("photon numbers must be positive for the log-log slope")
    le, ln = np.log(eps), np.log(n)
    slopes = (ln[2:] - ln[:-2]) / (le[2:] - le[:-2])  # slope at interior points
    k = int(np.argmax(slopes))
    peak = slopes[k]
    others = np.delete(slopes, k)
    tol = 0.05 * (slopes.max() - slopes.min() + 1e-300)
    unique = not np.any(others > peak - tol)
    i = k + 1  # index into eps
    value = eps[i]
    if refine and 1 <= k <= len(slopes) - 2:
        y0, y1, y2 = slopes[k - 1], slopes[k], slopes[k + 1]
        x0, x1, x2 = le[i - 1], le[i], le[i + 1]
        denom = (y0 - 2.0 * y1 + y2)
        if denom < 0:  # concave peak
            delta = 0.5 * (y0 - y2) / denom
            delta = float(np.clip(delta, -1.0, 1.0))
            value = float(np.exp(x1 + delta * 0.5 * (x2 - x0)))
    return ThresholdEstimate(value=float(value), grid_index=i, unique=unique, slopes=slopes)
