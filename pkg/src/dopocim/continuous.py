"""Continuous-time c-number SDE models of coupled DOPOs.

Five model families share one parameterisation:

* ``wigner_two``  -- two coupled DOPOs, truncated Wigner, pump and coupling
  path adiabatically eliminated.  Normalised signal amplitudes A_j with
  saturation parameter g, effective coupling xi in [0, 1), pump rate E
  relative to the solitary threshold.
* ``wigner_ring`` -- N-pulse nearest-neighbour ring of the same equation with
  periodic boundary; each coupling path's noise is shared by its two
  neighbouring pulses.
* ``wigner_five`` -- the un-eliminated five-mode model (two signals, two
  pumps, one coupling mode) with additive reservoir noise on every mode.
* ``positive_p_two`` -- doubled-phase-space (alpha, beta) form of the
  eliminated two-DOPO equation; exact normally-ordered moments, real Wiener
  increments with parametric multiplicative amplitude sqrt(E - A^2).
* ``positive_p_full`` -- the ten-variable un-eliminated doubled form; noise
  only on the signal rows, with multiplicative amplitude sqrt(kappa * pump).

The eliminated Wigner noise is
    g * [ sqrt(1 - c*xi) dW_s + sqrt(2) A* dW_p + sqrt(xi) dW_c ]
with c = 1 for a pair and c = 2 for the ring (two coupling ports per pulse).
The sqrt(2) on the pump-noise feed-through is fixed by consistency with the
five-mode model; see tests/test_models_cross.py for the numerical check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .reservoirs import ReservoirSpec
from .streams import RngStream, WienerConvention, sample_complex_wiener, sample_real_wiener

__all__ = [
    "PumpSchedule",
    "FullModelRates",
    "ContinuousParams",
    "pump_schedule_eval",
    "pump_values",
    "sample_initial_state",
    "wigner_two_dopo_increment",
    "wigner_ring_increment",
    "wigner_five_mode_increment",
    "positive_p_eliminated_increment",
    "positive_p_full_increment",
]

ANTIFERRO = -1
FERRO = +1


@dataclass(frozen=True)
class PumpSchedule:
    """Pump rate versus normalised time: linear ramp, constant, or abrupt."""

    kind: str
    e_max: float
    tau_max: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear_ramp", "constant", "abrupt"):
            raise ValueError(f"unknown pump schedule kind {self.kind!r}")
        if self.kind == "linear_ramp" and not self.tau_max > 0:
            raise ValueError("linear_ramp needs a positive ramp duration")

    @classmethod
    def linear_ramp(cls, e_max: float, tau_max: float) -> "PumpSchedule":
        return cls("linear_ramp", float(e_max), float(tau_max))

    @classmethod
    def constant(cls, e: float) -> "PumpSchedule":
        return cls("constant", float(e))

    @classmethod
    def abrupt(cls, eps: float) -> "PumpSchedule":
        # Switched on at tau = 0 and held; identical evaluation to constant.
        return cls("abrupt", float(eps))


def pump_schedule_eval(schedule: PumpSchedule, tau: float) -> float:
    """E(tau); a ramp holds at its maximum beyond tau_max."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    if schedule.kind == "linear_ramp":
        if tau >= schedule.tau_max:
            return schedule.e_max
        return schedule.e_max * (tau / schedule.tau_max)
    return schedule.e_max


def pump_values(schedule: PumpSchedule, dt: float, n_steps: int) -> np.ndarray:
    """Pump rate at the start of each step (the Ito evaluation point)."""
    taus = dt * np.arange(n_steps)
    if schedule.kind == "linear_ramp":
        return schedule.e_max * np.minimum(taus / schedule.tau_max, 1.0)
    return np.full(n_steps, schedule.e_max)


@dataclass(frozen=True)
class FullModelRates:
    """Cavity decay rates and couplings of the un-eliminated models.

    The eliminated description emerges for gamma_p, gamma_c >> gamma_s with
        gamma_s' = gamma_s + zeta^2 / gamma_c
        xi       = zeta^2 / (gamma_s' gamma_c)
        g        = kappa / sqrt(2 gamma_s' gamma_p)
        E        = kappa eps / (gamma_s' gamma_p)
    """

    gamma_s: float
    gamma_p: float
    gamma_c: float
    kappa: float
    zeta: float

    def __post_init__(self):
        for name in ("gamma_s", "gamma_p", "gamma_c", "kappa"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.zeta < 0:
            raise ValueError("zeta must be nonnegative")

    @property
    def gamma_s_eff(self) -> float:
        return self.gamma_s + self.zeta**2 / self.gamma_c

    @property
    def xi(self) -> float:
        return self.zeta**2 / (self.gamma_s_eff * self.gamma_c)

    @property
    def g(self) -> float:
        return self.kappa / np.sqrt(2.0 * self.gamma_s_eff * self.gamma_p)

    def pump_amplitude(self, e_normalized: float) -> float:
        """External drive eps giving normalised pump rate E."""
        return e_normalized * self.gamma_s_eff * self.gamma_p / self.kappa

    @classmethod
    def from_normalized(cls, g: float, xi: float, rate_ratio: float = 100.0) -> "FullModelRates":
        """Rates reproducing (g, xi) with gamma_s' = 1 and fast ancilla modes."""
        if not 0 <= xi < 1:
            raise ValueError("xi must lie in [0, 1)")
        gamma_p = gamma_c = float(rate_ratio)
        zeta = np.sqrt(xi * gamma_c)
        gamma_s = 1.0 - xi
        kappa = g * np.sqrt(2.0 * gamma_p)
        return cls(gamma_s, gamma_p, gamma_c, kappa, zeta)


@dataclass(frozen=True)
class ContinuousParams:
    """Parameters shared by the continuous DOPO network models."""

    g: float
    xi: float
    pump: PumpSchedule
    coupling_sign: int = ANTIFERRO
    reservoir_central: ReservoirSpec = field(default_factory=ReservoirSpec.vacuum)
    full_rates: FullModelRates | None = None

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"saturation parameter g must be positive, got {self.g}")
        if not 0.0 <= self.xi < 1.0:
            raise ValueError(f"effective coupling xi must lie in [0, 1), got {self.xi}")
        if self.coupling_sign not in (ANTIFERRO, FERRO):
            raise ValueError("coupling_sign must be +1 (ferro) or -1 (antiferro)")
        if self.full_rates is not None:
            if abs(self.full_rates.xi - self.xi) > 1e-9 * max(1.0, self.xi):
                raise ValueError("full_rates are inconsistent with xi")
            if abs(self.full_rates.g - self.g) > 1e-9 * self.g:
                raise ValueError("full_rates are inconsistent with g")


def sample_initial_state(representation: str, mode_count: int, g: float, stream: RngStream) -> np.ndarray:
    """Initial c-number state of one trajectory.

    Wigner amplitudes start in the vacuum distribution (per-quadrature
    variance g^2/4 in normalised units); doubled-phase-space amplitudes start
    exactly at zero.
    """
    if representation == "positive_p":
        return np.zeros(mode_count, dtype=complex)
    if representation != "wigner":
        raise ValueError(f"unknown representation {representation!r}")
    z = stream.generator.standard_normal((mode_count, 2))
    return (g / 2.0) * (z[:, 0] + 1j * z[:, 1])


# ---------------------------------------------------------------------------
# Reference one-step increments (the compiled kernels implement the same maps)
# ---------------------------------------------------------------------------

def _coupling_drift_sign(params: ContinuousParams) -> float:
    # Antiferro elimination yields -xi * A_other; ferro flips the sign.
    return float(params.coupling_sign) * params.xi


def wigner_two_dopo_increment(
    state: np.ndarray,
    params: ContinuousParams,
    tau: float,
    dw: Mapping[str, complex],
    dt: float,
) -> np.ndarray:
    """One Euler-Maruyama increment of the eliminated two-DOPO Wigner model.

    ``dw`` carries complex Wiener increments "s1", "s2", "p1", "p2", "c";
    the "c" increment is shared by both DOPOs and is the only one carrying
    reservoir scaling.
    """
    a1, a2 = state
    e = pump_schedule_eval(params.pump, tau)
    xi, g = params.xi, params.g
    cxi = _coupling_drift_sign(params)
    d1 = (-a1 + (e - a1 * a1) * np.conj(a1) + cxi * a2) * dt
    d2 = (-a2 + (e - a2 * a2) * np.conj(a2) + cxi * a1) * dt
    sq_loc = np.sqrt(1.0 - xi)
    sq_c = np.sqrt(xi)
    c2_sign = -float(params.coupling_sign)  # +1 for antiferro
    n1 = g * (sq_loc * dw["s1"] + np.sqrt(2.0) * np.conj(a1) * dw["p1"] + sq_c * dw["c"])
    n2 = g * (sq_loc * dw["s2"] + np.sqrt(2.0) * np.conj(a2) * dw["p2"] + c2_sign * sq_c * dw["c"])
    return np.array([d1 + n1, d2 + n2])


def wigner_ring_increment(
    state: np.ndarray,
    params: ContinuousParams,
    tau: float,
    dw: Mapping[str, np.ndarray],
    dt: float,
) -> np.ndarray:
    """One increment of the N-pulse ring model (periodic boundary).

    ``dw`` carries arrays "s", "p", "c" of shape (N,); coupling-path draw
    ``c[j]`` sits between pulses j-1 and j, so pulse j receives c[j] and
    c[j+1].  Needs N >= 3.
    """
    a = np.asarray(state)
    n = a.shape[0]
    if n < 3:
        raise ValueError(f"ring topology needs at least 3 pulses, got {n}")
    e = pump_schedule_eval(params.pump, tau)
    xi, g = params.xi, params.g
    cxi = _coupling_drift_sign(params)
    neighbours = np.roll(a, 1) + np.roll(a, -1)
    drift = (-a + (e - a * a) * np.conj(a) + cxi * neighbours) * dt
    pair_sign = -float(params.coupling_sign)
    noise = g * (
        np.sqrt(1.0 - 2.0 * xi) * dw["s"]
        + np.sqrt(2.0) * np.conj(a) * dw["p"]
        + np.sqrt(xi) * (np.roll(dw["c"], -1) + pair_sign * dw["c"])
    )
    return drift + noise


def wigner_five_mode_increment(
    state: np.ndarray,
    params: ContinuousParams,
    t: float,
    dw: Mapping[str, complex],
    dt: float,
) -> np.ndarray:
    """One increment of the un-eliminated five-mode Wigner model.

    State order: (a_s1, a_s2, a_p1, a_p2, a_c).  All five modes carry
    additive reservoir noise sqrt(gamma) dW.
    """
    r = params.full_rates
    if r is None:
        raise ValueError("five-mode model requires full_rates")
    s1, s2, p1, p2, c = state
    e_phase = float(params.coupling_sign)
    eps = r.pump_amplitude(pump_schedule_eval(params.pump, t * r.gamma_s_eff))
    ds1 = (-r.gamma_s * s1 + r.kappa * p1 * np.conj(s1) + r.zeta * c) * dt
    ds2 = (-r.gamma_s * s2 + r.kappa * p2 * np.conj(s2) - r.zeta * e_phase * c) * dt
    dp1 = (-r.gamma_p * p1 - 0.5 * r.kappa * s1 * s1 + eps) * dt
    dp2 = (-r.gamma_p * p2 - 0.5 * r.kappa * s2 * s2 + eps) * dt
    dc = (-r.gamma_c * c - r.zeta * s1 + r.zeta * e_phase * s2) * dt
    out = np.array([ds1, ds2, dp1, dp2, dc])
    out += np.array(
        [
            np.sqrt(r.gamma_s) * dw["s1"],
            np.sqrt(r.gamma_s) * dw["s2"],
            np.sqrt(r.gamma_p) * dw["p1"],
            np.sqrt(r.gamma_p) * dw["p2"],
            np.sqrt(r.gamma_c) * dw["c"],
        ]
    )
    return out


def positive_p_eliminated_increment(
    state: np.ndarray,
    params: ContinuousParams,
    tau: float,
    dw: Mapping[str, float],
    dt: float,
) -> np.ndarray:
    """One increment of the eliminated doubled-phase-space two-DOPO model.

    State order: (A1, B1, A2, B2).  ``dw`` carries real Wiener increments
    "a1", "b1", "a2", "b2" of variance dt; the noise amplitude is the
    principal complex square root g*sqrt(E - A^2).
    """
    a1, b1, a2, b2 = state
    e = pump_schedule_eval(params.pump, tau)
    g = params.g
    cxi = _coupling_drift_sign(params)
    da1 = (-a1 + (e - a1 * a1) * b1 + cxi * a2) * dt + g * np.sqrt(complex(e) - a1 * a1) * dw["a1"]
    db1 = (-b1 + (e - b1 * b1) * a1 + cxi * b2) * dt + g * np.sqrt(complex(e) - b1 * b1) * dw["b1"]
    da2 = (-a2 + (e - a2 * a2) * b2 + cxi * a1) * dt + g * np.sqrt(complex(e) - a2 * a2) * dw["a2"]
    db2 = (-b2 + (e - b2 * b2) * a2 + cxi * b1) * dt + g * np.sqrt(complex(e) - b2 * b2) * dw["b2"]
    return np.array([da1, db1, da2, db2])


def positive_p_full_increment(
    state: np.ndarray,
    params: ContinuousParams,
    t: float,
    dw: Mapping[str, float],
    dt: float,
) -> np.ndarray:
    """One increment of the ten-variable doubled-phase-space model.

    State order: (a_s1, b_s1, a_s2, b_s2, a_p1, b_p1, a_p2, b_p2, a_c, b_c).
    Only the four signal rows carry noise: real Wiener increments "as1",
    "bs1", "as2", "bs2" of variance dt with multiplicative amplitudes
    sqrt(kappa * pump partner).  Pump and coupling rows are noiseless.
    """
    r = params.full_rates
    if r is None:
        raise ValueError("ten-variable model requires full_rates")
    as1, bs1, as2, bs2, ap1, bp1, ap2, bp2, ac, bc = state
    e_phase = float(params.coupling_sign)
    eps = r.pump_amplitude(pump_schedule_eval(params.pump, t * r.gamma_s_eff))
    k, z = r.kappa, r.zeta
    out = np.empty(10, dtype=complex)
    out[0] = (-r.gamma_s * as1 + k * ap1 * bs1 + z * ac) * dt + np.sqrt(k * ap1) * dw["as1"]
    out[1] = (-r.gamma_s * bs1 + k * bp1 * as1 + z * bc) * dt + np.sqrt(k * bp1) * dw["bs1"]
    out[2] = (-r.gamma_s * as2 + k * ap2 * bs2 - z * e_phase * ac) * dt + np.sqrt(k * ap2) * dw["as2"]
    out[3] = (-r.gamma_s * bs2 + k * bp2 * as2 - z * e_phase * bc) * dt + np.sqrt(k * bp2) * dw["bs2"]
    out[4] = (-r.gamma_p * ap1 - 0.5 * k * as1 * as1 + eps) * dt
    out[5] = (-r.gamma_p * bp1 - 0.5 * k * bs1 * bs1 + eps) * dt
    out[6] = (-r.gamma_p * ap2 - 0.5 * k * as2 * as2 + eps) * dt
    out[7] = (-r.gamma_p * bp2 - 0.5 * k * bs2 * bs2 + eps) * dt
    out[8] = (-r.gamma_c * ac - z * as1 + z * e_phase * as2) * dt
    out[9] = (-r.gamma_c * bc - z * bs1 + z * e_phase * bs2) * dt
    return out


# ---------------------------------------------------------------------------
# Reference systems usable with integrate.integrate_trajectory
# ---------------------------------------------------------------------------

class WignerTwoSystem:
    """Labelled-stream reference form of the eliminated two-DOPO model."""

    dim = 2
    stream_labels = ("s1", "s2", "p1", "p2", "c")

    def __init__(self, params: ContinuousParams):
        self.params = params

    def draw(self, streams, dt):
        conv = WienerConvention(dt)
        conv_c = WienerConvention.for_reservoir(self.params.reservoir_central, dt)
        return {
            "s1": sample_complex_wiener(conv, streams["s1"]),
            "s2": sample_complex_wiener(conv, streams["s2"]),
            "p1": sample_complex_wiener(conv, streams["p1"]),
            "p2": sample_complex_wiener(conv, streams["p2"]),
            "c": sample_complex_wiener(conv_c, streams["c"]),
        }

    def drift(self, y, t):
        a1, a2 = y
        e = pump_schedule_eval(self.params.pump, t)
        cxi = _coupling_drift_sign(self.params)
        return np.array(
            [
                -a1 + (e - a1 * a1) * np.conj(a1) + cxi * a2,
                -a2 + (e - a2 * a2) * np.conj(a2) + cxi * a1,
            ]
        )

    def noise(self, y, t, w):
        inc = wigner_two_dopo_increment(y, self.params, t, w, 0.0)
        return inc  # zero dt leaves only the noise part


class PositivePTwoSystem:
    """Labelled-stream reference form of the eliminated doubled model."""

    dim = 4
    stream_labels = ("a1", "b1", "a2", "b2")

    def __init__(self, params: ContinuousParams):
        self.params = params

    def draw(self, streams, dt):
        return {k: float(sample_real_wiener(dt, streams[k])) for k in self.stream_labels}

    def drift(self, y, t):
        return positive_p_eliminated_increment(y, self.params, t, dict.fromkeys(self.stream_labels, 0.0), 1.0)

    def noise(self, y, t, w):
        return positive_p_eliminated_increment(y, self.params, t, w, 0.0)
