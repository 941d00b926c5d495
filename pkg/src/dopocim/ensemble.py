"""Trajectory-ensemble execution with deterministic parallelism.

Each trajectory owns derived random streams keyed by its global index, so an
ensemble's result is a pure function of its configuration: worker count and
chunking affect speed only.  Divergent trajectories (non-finite state or
amplitude beyond the cap at a sample time) are excluded from every estimate
and counted; a run with more than 1% divergence is flagged unreliable.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import observables as obs
from ._backend import kernels
from .continuous import ContinuousParams, pump_values, sample_initial_state
from .discrete import DiscreteParams
from .integrate import IntegratorConfig
from .reservoirs import quadrature_variances
from .streams import derive_stream

__all__ = [
    "ContinuousModel",
    "DiscreteModel",
    "EnsembleConfig",
    "EnsembleSeries",
    "run_ensemble",
    "standard_error",
    "resolve_workers",
]

CONTINUOUS_KINDS = ("wigner_two", "wigner_ring", "wigner_five", "positive_p_two", "positive_p_full")
_CHUNK = 512
_PATH_STREAM = "path"
_INIT_STREAM = "init"


@dataclass(frozen=True)
class ContinuousModel:
    """A continuous-time model plus its integration grid."""

    kind: str
    params: ContinuousParams
    integrator: IntegratorConfig
    n_modes: int = 2  # ring size for wigner_ring; fixed otherwise

    def __post_init__(self):
        if self.kind not in CONTINUOUS_KINDS:
            raise ValueError(f"unknown continuous model kind {self.kind!r}")
        if self.kind == "wigner_ring":
            if self.n_modes < 3:
                raise ValueError("ring topology needs at least 3 pulses")
        elif self.kind in ("wigner_two", "positive_p_two"):
            object.__setattr__(self, "n_modes", 2)
        elif self.kind == "wigner_five":
            object.__setattr__(self, "n_modes", 5)
        else:
            object.__setattr__(self, "n_modes", 10)
        if self.kind.startswith("positive_p") and self.params.reservoir_central.kind != "vacuum":
            raise ValueError("doubled-phase-space models support only a vacuum coupling-path reservoir")
        if self.kind in ("wigner_five", "positive_p_full") and self.params.full_rates is None:
            raise ValueError(f"{self.kind} requires full_rates")

    @property
    def representation(self) -> str:
        return "positive_p" if self.kind.startswith("positive_p") else "wigner"

    @property
    def n_signal_modes(self) -> int:
        if self.kind == "wigner_ring":
            return self.n_modes
        return 2

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.integrator.sample_times, dtype=float)


@dataclass(frozen=True)
class DiscreteModel:
    """The round-trip machine plus its sampling grid."""

    params: DiscreteParams
    sample_rounds: tuple[int, ...]
    upair_modes: tuple[int, int] | None = None
    upair_sign: int = +1  # -1 evaluates x_i - x_j instead of x_i + x_j

    kind = "discrete"
    representation = "wigner"

    def __post_init__(self):
        rr = tuple(int(r) for r in self.sample_rounds)
        if any(b <= a for a, b in zip(rr, rr[1:])) or (rr and (rr[0] < 0 or rr[-1] > self.params.rounds)):
            raise ValueError("sample_rounds must be ascending and within [0, rounds]")
        if not rr or rr[-1] != self.params.rounds:
            raise ValueError("sample_rounds must include the final round")
        object.__setattr__(self, "sample_rounds", rr)
        if self.upair_modes is not None:
            i, j = self.upair_modes
            if not (0 <= i < self.params.n_pulses and 0 <= j < self.params.n_pulses):
                raise ValueError("upair_modes out of range")
        if self.upair_sign not in (-1, 1):
            raise ValueError("upair_sign must be +1 or -1")

    @property
    def n_modes(self) -> int:
        return self.params.n_pulses

    @property
    def n_signal_modes(self) -> int:
        return self.params.n_pulses

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.sample_rounds, dtype=float)


_KNOWN_OBSERVABLES = ("epr_pair", "epr_ring", "photon", "configs", "upair_var")


@dataclass(frozen=True)
class EnsembleConfig:
    model: ContinuousModel | DiscreteModel
    n_trajectories: int
    master_seed: int
    observables: tuple[str, ...] = ()
    divergence_cap: float = 1e3

    def __post_init__(self):
        if self.n_trajectories < 2:
            raise ValueError("need at least two trajectories")
        if not self.divergence_cap > 0:
            raise ValueError("divergence_cap must be positive")
        object.__setattr__(self, "observables", tuple(self.observables))
        for name in self.observables:
            base = name.split(":")[0]
            if base not in _KNOWN_OBSERVABLES and base != "quad":
                raise ValueError(f"unknown observable {name!r}")
        if "epr_ring" in self.observables and self.model.n_signal_modes % 2 != 0:
            raise ValueError("epr_ring requires an even number of signal modes")
        if "upair_var" in self.observables:
            if self.model.kind != "discrete" or self.model.upair_modes is None:
                raise ValueError("upair_var needs a discrete model with upair_modes set")


@dataclass
class EnsembleSeries:
    """Time-indexed ensemble estimates with standard errors."""

    times: np.ndarray
    series: dict[str, np.ndarray]
    final_states: np.ndarray
    diverged: np.ndarray
    survivor_count: int
    divergent_count: int
    unreliable: bool
    config: EnsembleConfig
    config_series: np.ndarray | None = None
    round_series: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def final_configs(self) -> np.ndarray:
        """Packed spin configurations of the surviving final states."""
        scale = _signal_scale(self.config.model)
        sig = _signal_slice(self.config.model, self.final_states[self.diverged < 0])
        q = _quadratures(self.config.model, sig, scale)
        return obs.pack_spins(obs.spins(q.c))


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get("DOPOCIM_WORKERS", "").strip()
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("worker count must be positive")
    return workers


def standard_error(records: np.ndarray, kind: str) -> float:
    """Standard error of an estimator over per-trajectory records.

    ``kind``: "variance" (jackknife of the sample variance), "mean"
    (std / sqrt(n)), or "probability" (binomial).
    """
    r = np.asarray(records)
    n = r.shape[0]
    if n < 2:
        raise ValueError("need at least two records")
    if kind == "variance":
        return obs._variance_stat(r, 0.0)[1]
    if kind == "mean":
        return float(r.std(ddof=1) / np.sqrt(n))
    if kind == "probability":
        p = float(r.mean())
        return float(np.sqrt(p * (1.0 - p) / n))
    raise ValueError(f"unknown estimator kind {kind!r}")


# ---------------------------------------------------------------------------
# Worker side
# ---------------------------------------------------------------------------

def _signal_scale(model) -> float:
    if model.kind == "discrete":
        return model.params.mu
    if model.kind in ("wigner_two", "wigner_ring", "positive_p_two"):
        return model.params.g
    return 1.0  # un-eliminated models carry unnormalised amplitudes


def _signal_slice(model, samples: np.ndarray):
    """Signal amplitudes from raw state samples: alpha or an (alpha, beta) pair."""
    if model.kind in ("positive_p_two", "positive_p_full"):
        return samples[..., 0:4:2], samples[..., 1:4:2]
    if model.kind == "wigner_five":
        return samples[..., 0:2]
    return samples


def _quadratures(model, sig, scale) -> obs.QuadratureSamples:
    if isinstance(sig, tuple):
        return obs.positive_p_quadratures(sig[0], sig[1], scale)
    return obs.wigner_quadratures(sig, scale)


def _initial_states(model, seed: int, lo: int, hi: int) -> np.ndarray:
    kk = hi - lo
    m = model.n_modes
    out = np.zeros((kk, m), dtype=np.complex128)
    if model.representation == "positive_p":
        return out
    g = _signal_scale(model) if model.kind != "wigner_five" else 1.0
    for k in range(kk):
        stream = derive_stream(seed, lo + k, _INIT_STREAM)
        out[k] = sample_initial_state("wigner", m, g, stream)
    return out


def _run_kernel(model, config: EnsembleConfig, lo: int, hi: int):
    gens = [derive_stream(config.master_seed, i, _PATH_STREAM).generator for i in range(lo, hi)]
    a0 = _initial_states(model, config.master_seed, lo, hi)
    cap = config.divergence_cap
    kern = kernels()
    if model.kind == "discrete":
        p = model.params
        vx, vp = quadrature_variances(p.reservoir)
        ui, uj = model.upair_modes if model.upair_modes is not None else (-1, -1)
        samples, upair, diverged = kern.run_discrete(
            gens, a0, p.pump_e, p.mu, p.t_out, p.t_inj, p.substeps, p.inject_before_gain,
            vx, vp, np.ascontiguousarray(p.coupling), p.rounds,
            np.asarray(model.sample_rounds, dtype=np.int64), ui, uj, float(model.upair_sign), cap,
        )
        return samples, upair, diverged
    p = model.params
    ic = model.integrator
    steps = ic.sample_steps()
    n_steps = ic.n_steps
    sx, sp = (4.0 * v for v in quadrature_variances(p.reservoir_central))
    if model.kind in ("wigner_five", "positive_p_full"):
        rates = p.full_rates
        # Drive in laboratory time; the schedule is stated in normalised time.
        e_norm = pump_values(p.pump, ic.dt * rates.gamma_s_eff, n_steps)
        eps = np.array([rates.pump_amplitude(e) for e in e_norm])
        if model.kind == "wigner_five":
            samples, diverged = kern.run_wigner_five(
                gens, a0, eps, rates.gamma_s, rates.gamma_p, rates.gamma_c, rates.kappa,
                rates.zeta, float(p.coupling_sign), ic.dt, sx, sp, steps, cap,
            )
        else:
            samples, diverged = kern.run_positive_p_full(
                gens, a0, eps, rates.gamma_s, rates.gamma_p, rates.gamma_c, rates.kappa,
                rates.zeta, float(p.coupling_sign), ic.dt, steps, cap,
            )
        return samples, None, diverged
    e_steps = pump_values(p.pump, ic.dt, n_steps)
    if model.kind == "wigner_two":
        samples, diverged = kern.run_wigner_two(
            gens, a0, e_steps, p.xi, p.g, ic.dt, sx, sp, float(p.coupling_sign), steps, cap
        )
    elif model.kind == "wigner_ring":
        samples, diverged = kern.run_wigner_ring(
            gens, a0, e_steps, p.xi, p.g, ic.dt, sx, sp, float(p.coupling_sign), steps, cap
        )
    else:
        samples, diverged = kern.run_positive_p_two(
            gens, a0, e_steps, p.xi, p.g, ic.dt, float(p.coupling_sign), steps, cap
        )
    return samples, None, diverged


def _derive_chunk(config: EnsembleConfig, samples: np.ndarray) -> dict[str, np.ndarray]:
    model = config.model
    scale = _signal_scale(model)
    sig = _signal_slice(model, samples)
    derived: dict[str, np.ndarray] = {}
    need_quads = [o for o in config.observables if o != "upair_var"]
    if not need_quads:
        return derived
    q = _quadratures(model, sig, scale)  # arrays shaped (K, T, modes)
    c, s, ph = q.c, q.s, q.photon_terms
    for name in config.observables:
        if name == "epr_pair":
            derived["epr_u"] = c[..., 0] + c[..., 1]
            derived["epr_v"] = s[..., 0] - s[..., 1]
        elif name == "epr_ring":
            alt = np.resize([1.0, -1.0], c.shape[-1])
            derived["epr_u"] = c.sum(axis=-1)
            derived["epr_v"] = (s * alt).sum(axis=-1)
        elif name == "photon":
            derived["photon"] = ph.mean(axis=-1)
        elif name.startswith("quad:"):
            m = int(name.split(":")[1])
            derived[f"quad_c:{m}"] = c[..., m]
            derived[f"quad_s:{m}"] = s[..., m]
        elif name == "configs":
            derived["configs"] = obs.pack_spins(obs.spins(np.real(c)))
    return derived


def _run_chunk(args):
    config, lo, hi = args
    samples, upair, diverged = _run_kernel(config.model, config, lo, hi)
    derived = _derive_chunk(config, samples)
    if upair is not None and "upair_var" in config.observables:
        derived["upair"] = upair
    final_states = samples[:, -1, :].copy()
    return derived, final_states, diverged


# ---------------------------------------------------------------------------
# Driver and aggregation
# ---------------------------------------------------------------------------

def run_ensemble(config: EnsembleConfig, workers: int | None = None) -> EnsembleSeries:
    """Run all trajectories and aggregate the requested observables.

    The result is bit-identical for any worker count: every trajectory's
    streams are derived from its global index and the ordered per-trajectory
    records are concatenated before any reduction.
    """
    workers = resolve_workers(workers)
    n = config.n_trajectories
    # chunking is a throughput knob only: per-trajectory streams make the
    # result independent of how trajectories are grouped
    chunk = max(16, min(_CHUNK, -(-n // (4 * workers))))
    tasks = [(config, lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    if workers == 1 or len(tasks) == 1:
        results = [_run_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(_run_chunk, tasks))
    derived = {
        key: np.concatenate([r[0][key] for r in results], axis=0) for key in results[0][0]
    }
    final_states = np.concatenate([r[1] for r in results], axis=0)
    diverged = np.concatenate([r[2] for r in results], axis=0)
    return _aggregate(config, derived, final_states, diverged)


def _aggregate(config, derived, final_states, diverged) -> EnsembleSeries:
    model = config.model
    alive = diverged < 0
    n_div = int((~alive).sum())
    unreliable = n_div > 0.01 * config.n_trajectories
    if unreliable:
        warnings.warn(
            f"{n_div}/{config.n_trajectories} trajectories diverged; estimates are unreliable"
        )
    if not alive.any():
        raise RuntimeError("every trajectory diverged")
    rep_corr = 0.25 if model.representation == "positive_p" else 0.0
    series: dict[str, np.ndarray] = {}
    round_series: dict[str, np.ndarray] = {}
    n_times = len(model.times)

    def per_time(values, corr):
        est = np.empty(values.shape[1])
        se = np.empty(values.shape[1])
        for t in range(values.shape[1]):
            est[t], se[t] = obs._variance_stat(values[alive, t], corr)
        return est, se

    for name in config.observables:
        if name in ("epr_pair", "epr_ring"):
            n_corr = 2 if name == "epr_pair" else model.n_signal_modes
            u, v = derived["epr_u"], derived["epr_v"]
            series["du2"], series["du2_se"] = per_time(u, n_corr * rep_corr)
            series["dv2"], series["dv2_se"] = per_time(v, n_corr * rep_corr)
            est = np.empty(n_times)
            se = np.empty(n_times)
            for t in range(n_times):
                est[t], se[t] = obs._variance_stat_sum(u[alive, t], v[alive, t], n_corr * rep_corr)
            series["epr_sum"], series["epr_sum_se"] = est, se
        elif name == "photon":
            ph = derived["photon"][alive]
            series["photon"] = ph.mean(axis=0)
            series["photon_se"] = ph.std(axis=0, ddof=1) / np.sqrt(ph.shape[0])
        elif name.startswith("quad:"):
            m = int(name.split(":")[1])
            series["var_x"], series["var_x_se"] = per_time(derived[f"quad_c:{m}"], rep_corr)
            series["var_p"], series["var_p_se"] = per_time(derived[f"quad_s:{m}"], rep_corr)
        elif name == "upair_var":
            up = derived["upair"]
            rounds = up.shape[1]
            est = np.empty(rounds)
            se = np.empty(rounds)
            for t in range(rounds):
                est[t], se[t] = obs._variance_stat(up[alive, t], 0.0)
            round_series["upair_var"], round_series["upair_var_se"] = est, se
    config_series = derived.get("configs")
    return EnsembleSeries(
        times=model.times,
        series=series,
        final_states=final_states,
        diverged=diverged,
        survivor_count=int(alive.sum()),
        divergent_count=n_div,
        unreliable=unreliable,
        config=config,
        config_series=config_series,
        round_series=round_series,
    )
