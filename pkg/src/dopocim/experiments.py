"""Named experiment presets, result tables and CSV emission.

Each preset reproduces one study from the simulator at desk scale: EPR
inseparability of a DOPO pair under both representations, ring-network
squeezing sweeps, post-selected spin statistics, and the discrete machine's
photon-number, correlation and success-probability curves.  Presets write
plot-ready CSV tables (one per panel) plus a JSON sidecar holding runtime
facts that must not influence the result bytes.

Result CSVs are deterministic: identical configuration and seed reproduce
identical bytes for any worker count.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import observables as obs
from ._backend import active_backend
from .continuous import ContinuousParams, FullModelRates, PumpSchedule
from .discrete import DiscreteParams, estimate_threshold, ring_coupling
from .ensemble import (
    ContinuousModel,
    DiscreteModel,
    EnsembleConfig,
    run_ensemble,
)
from .integrate import IntegratorConfig
from .reservoirs import ReservoirSpec

__all__ = [
    "ResultTable",
    "ExperimentSpec",
    "ConfigError",
    "FIGURES",
    "run_experiment",
    "parse_config",
    "parse_j_file",
    "ensemble_result_table",
    "write_csv",
    "read_csv",
]


# ---------------------------------------------------------------------------
# Result tables
# ---------------------------------------------------------------------------

@dataclass
class ResultTable:
    columns: dict[str, np.ndarray]
    meta: dict

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("all columns must have equal length")

    def __eq__(self, other):
        if not isinstance(other, ResultTable) or self.meta != other.meta:
            return False
        if list(self.columns) != list(other.columns):
            return False
        return all(np.array_equal(self.columns[k], other.columns[k]) for k in self.columns)


def write_csv(table: ResultTable, path) -> Path:
    path = Path(path)
    lines = ["# dopocim-result v1"]
    for key in sorted(table.meta):
        lines.append(f"# {key} = {json.dumps(table.meta[key], sort_keys=True)}")
    names = list(table.columns)
    lines.append(",".join(names))
    cols = [np.asarray(table.columns[k], dtype=float) for k in names]
    for row in zip(*cols):
        lines.append(",".join("%.17g" % v for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path) -> ResultTable:
    meta = {}
    names = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                meta[key.strip()] = json.loads(val.strip())
            continue
        if names is None:
            names = line.split(",")
            continue
        rows.append([float(x) for x in line.split(",")])
    if names is None:
        raise ValueError(f"{path}: no header row")
    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return ResultTable({n: data[:, i].copy() for i, n in enumerate(names)}, meta)


def ensemble_result_table(series, x_name: str = "tau", extra_meta: dict | None = None) -> ResultTable:
    """Generic table of an EnsembleSeries' scalar series versus time."""
    cols = {x_name: series.times}
    cols.update(series.series)
    meta = {
        "n_trajectories": series.config.n_trajectories,
        "master_seed": series.config.master_seed,
        "survivors": series.survivor_count,
        "divergent": series.divergent_count,
        "version": __version__,
    }
    if extra_meta:
        meta.update(extra_meta)
    return ResultTable(cols, meta)


# ---------------------------------------------------------------------------
# Experiment specification
# ---------------------------------------------------------------------------

class ConfigError(ValueError):
    pass


_COMMON_OVERRIDES = ("trajectories", "seed", "dt")
_FIGURE_OVERRIDES = {
    "fig4": _COMMON_OVERRIDES + ("xi_values",),
    "fig5": _COMMON_OVERRIDES + ("ramp_times",),
    "fig6": _COMMON_OVERRIDES + ("r_values",),
    "fig7": _COMMON_OVERRIDES + ("times",),
    "fig8": _COMMON_OVERRIDES + ("r_values",),
    "fig9": _COMMON_OVERRIDES + ("r_values",),
    "fig10": _COMMON_OVERRIDES + ("r_values", "p_grid", "rounds"),
    "fig11": _COMMON_OVERRIDES + ("r_values", "p_grid", "rounds"),
    "fig12": _COMMON_OVERRIDES + ("r_values", "p_grid", "rounds"),
    "fig13": _COMMON_OVERRIDES + ("nth_values", "p_grid", "rounds"),
    "fig14": _COMMON_OVERRIDES + ("nth_values", "p_grid", "rounds"),
}
FIGURES = tuple(sorted(_FIGURE_OVERRIDES))


@dataclass(frozen=True)
class ExperimentSpec:
    figure: str
    out_dir: Path
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.figure not in _FIGURE_OVERRIDES:
            raise ConfigError(f"unknown figure id {self.figure!r}; known: {', '.join(FIGURES)}")
        allowed = _FIGURE_OVERRIDES[self.figure]
        for key in self.overrides:
            if key not in allowed:
                raise ConfigError(f"figure {self.figure} does not accept override {key!r}")
        object.__setattr__(self, "out_dir", Path(self.out_dir))


def _sub_seed(master_seed: int, label: str) -> int:
    ss = np.random.SeedSequence(entropy=(int(master_seed), int.from_bytes(label.encode(), "little")))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# defaults shared by the continuous presets
_CONT_N = 20000
_DISC_N = 4000
_DEFAULT_SEED = 20160908
_SPIN_UP_DOWN = 1  # packed (+1, -1) pair
_SPIN_DOWN_UP = 2


def _two_dopo_model(xi, dt, schedule, r=0.0, kind="wigner_two", total_time=None):
    reservoir = ReservoirSpec.squeezed(r) if r else ReservoirSpec.vacuum()
    params = ContinuousParams(g=0.01, xi=xi, pump=schedule, reservoir_central=reservoir)
    tmax = total_time if total_time is not None else schedule.tau_max
    ic = IntegratorConfig.regular(dt, tmax, 1.0)
    return ContinuousModel(kind, params, ic)


def _ring_model(r, dt, n_modes=16, xi=0.4, e_max=0.375, tau_max=200.0):
    reservoir = ReservoirSpec.squeezed(r) if r else ReservoirSpec.vacuum()
    params = ContinuousParams(g=0.01, xi=xi, pump=PumpSchedule.linear_ramp(e_max, tau_max), reservoir_central=reservoir)
    ic = IntegratorConfig.regular(dt, tau_max, 1.0)
    return ContinuousModel("wigner_ring", params, ic, n_modes=n_modes)


def _fig4(spec: ExperimentSpec, workers):
    ov = spec.overrides
    n = int(ov.get("trajectories", _CONT_N))
    seed = int(ov.get("seed", _DEFAULT_SEED))
    dt = float(ov.get("dt", 1e-3))
    xis = tuple(ov.get("xi_values", (0.6, 0.995)))
    schedule = PumpSchedule.linear_ramp(1.5, 200.0)
    tables = []
    for xi in xis:
        for kind, rep in (("wigner_two", "wigner"), ("positive_p_two", "positive_p")):
            model = _two_dopo_model(xi, dt, schedule, kind=kind)
            cfg = EnsembleConfig(model, n, _sub_seed(seed, f"fig4/{rep}/xi={xi}"), ("epr_pair", "photon"))
            series = run_ensemble(cfg, workers)
            tables.append(
                (
                    f"fig4_{rep}_xi{xi:g}",
                    ensemble_result_table(series, extra_meta={"figure": "fig4", "xi": xi, "representation": rep}),
                )
            )
    return tables


def _fig5(spec: ExperimentSpec, workers):
    ov = spec.overrides
    n = int(ov.get("trajectories", _CONT_N))
    seed = int(ov.get("seed", _DEFAULT_SEED))
    dt = float(ov.get("dt", 1e-3))
    ramps = tuple(ov.get("ramp_times", (200.0, 400.0, 800.0)))
    tables = []
    for tau_max in ramps:
        schedule = PumpSchedule.linear_ramp(1.5, tau_max)
        model = _two_dopo_model(0.6, dt, schedule)
        cfg = EnsembleConfig(model, n, _sub_seed(seed, f"fig5/ramp={tau_max}"), ("epr_pair", "photon"))
        series = run_ensemble(cfg, workers)
        table = ensemble_result_table(series, extra_meta={"figure": "fig5", "ramp_time": tau_max})
        table.columns["pump_e"] = np.array([min(1.5, 1.5 * t / tau_max) for t in series.times])
        tables.append((f"fig5_ramp{tau_max:g}", table))
    return tables


def _fig6(spec: ExperimentSpec, workers):
    ov = spec.overrides
    n = int(ov.get("trajectories", _CONT_N))
    seed = int(ov.get("seed", _DEFAULT_SEED))
    dt = float(ov.get("dt", 1e-3))
    r_values = tuple(ov.get("r_values", (0.0, 0.5, 1.0)))
    tables = []
    for r in r_values:
        model = _ring_model(r, dt)
        cfg = EnsembleConfig(model, n, _sub_seed(seed, f"fig6/r={r}"), ("epr_ring",))
        series = run_ensemble(cfg, workers)
        tables.append(
            (f"fig6_r{r:g}", ensemble_result_table(series, extra_meta={"figure": "fig6", "r": r}))
        )
    return tables


def _posterior_columns(series, codes: dict[str, int]):
    """Post-selected probability series for named configurations."""
    mask, tables = obs.post_select(series.config_series[series.diverged < 0], codes["selected"])
    cols = {"tau": series.times}
    for name, code in codes.items():
        p = np.array([t.get(code)[0] for t in tables])
        se = np.array([t.get(code)[1] for t in tables])
        cols[f"p_{name}"] = p
        cols[f"p_{name}_se"] = se
    return cols, int(mask.sum())


def _fig7(spec: ExperimentSpec, workers):
    ov = spec.overrides
    n = int(ov.get("trajectories", _CONT_N))
    seed = int(ov.get("seed", _DEFAULT_SEED))
    dt = float(ov.get("dt", 1e-3))
    times = tuple(ov.get("times", (5.0, 20.0, 60.0, 80.0)))
    model = _two_dopo_model(0.6, dt, PumpSchedule.linear_ramp(1.5, 200.0))
    cfg = EnsembleConfig(model, n, _sub_seed(seed, "fig7"), ("epr_pair", "photon", "configs"))
    series = run_ensemble(cfg, workers)
    alive = series.diverged < 0
    mask, tables = obs.post_select(
        series.config_series[alive], _SPIN_UP_DOWN, [int(round(t)) for t in times]
    )
    labels = {"uu": 3, "ud": _SPIN_UP_DOWN, "du": _SPIN_DOWN_UP, "dd": 0}
    cols = {"tau": np.array(times, dtype=float)}
    for name, code in labels.items():
        cols[f"p_{name}"] = np.array([t.get(code)[0] for t in tables])
        cols[f"p_{name}_se"] = np.array([t.get(code)[1] for t in tables])
    meta = {
        "figure": "fig7",
        "n_trajectories": n,
        "master_seed": cfg.master_seed,
        "survivors_postselect": int(mask.sum()),
        "version": __version__,
    }
    return [("fig7_postselected", ResultTable(cols, meta))]


def _fig8(spec: ExperimentSpec, workers):
    ov = spec.overrides
    n = int(ov.get("trajectories", _CONT_N))
    seed = int(ov.get("seed", _DEFAULT_SEED))
    dt = float(ov.get("dt", 1e-3))
    r_values = tuple(ov.get("r_values", (0.0, 0.5, 1.0)))
    tables = []
    # Pump schedule matches the pair-inseparability study: E = 1.5 tau / 200.
    for r in r_values:
        model = _two_dopo_model(0.6, dt, PumpSchedule.linear_ramp(1.5, 200.0), r=r)
        cfg = EnsembleConfig(model, n, _sub_seed(seed, f"fig8/r={r}"), ("configs",))
        series = run_ensemble(cfg, workers)
        cols, n_sel = _posterior_columns(series, {"selected": _SPIN_UP_DOWN, "unselected": _SPIN_DOWN_UP})
        meta = {
            "figure": "fig8",
            "r": r,
            "n_trajectories": n,
            "master_seed": cfg.master_seed,
            "survivors_postselect": n_sel,
            "version": __version__,
        }
        tables.append((f"fig8_r{r:g}", ResultTable(cols, meta)))
    return tables


def _fig9(spec: ExperimentSpec, workers):
    ov = spec.overrides
    n = int(ov.get("trajectories", _CONT_N))
    seed = int(ov.get("seed", _DEFAULT_SEED))
    dt = float(ov.get("dt", 1e-3))
    r_values = tuple(ov.get("r_values", (0.0, 0.5, 1.0)))
    n_modes = 16
    sel = int(obs.pack_spins(np.resize([1, -1], n_modes)))
    unsel = int(obs.pack_spins(np.resize([-1, 1], n_modes)))
    tables = []
    for r in r_values:
        model = _ring_model(r, dt, n_modes=n_modes)
        cfg = EnsembleConfig(model, n, _sub_seed(seed, f"fig9/r={r}"), ("configs", "photon"))
        series = run_ensemble(cfg, workers)
        cols, n_sel = _posterior_columns(series, {"selected": sel, "unselected": unsel})
        meta = {
            "figure": "fig9",
            "r": r,
            "n_trajectories": n,
            "master_seed": cfg.master_seed,
            "survivors_postselect": n_sel,
            "version": __version__,
        }
        tables.append((f"fig9_r{r:g}", ResultTable(cols, meta)))
    return tables


# ---------------------------------------------------------------------------
# Discrete machine presets
# ---------------------------------------------------------------------------

_P_GRID = (0.4, 0.6, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.6, 1.8, 2.0)
_P_GRID_LOW = (0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0, 1.1, 1.2, 1.4, 1.7, 2.0)
_THRESHOLD_GRID = tuple(float(x) for x in np.geomspace(0.008, 0.12, 16))


def _machine(pump_e, reservoir, rounds, n_pulses=16, xi_ring=-0.01, upair=False):
    params = DiscreteParams(
        n_pulses=n_pulses,
        pump_e=pump_e,
        coupling=ring_coupling(n_pulses, xi_ring),
        reservoir=reservoir,
        rounds=rounds,
    )
    sample_rounds = (0, rounds // 2, rounds)
    return DiscreteModel(params, sample_rounds, upair_modes=(0, 1) if upair else None)


def scan_threshold(seed, rounds, workers, n_traj=1500, reservoir=None, grid=_THRESHOLD_GRID):
    """Photon-number scan over a pump grid and the resulting threshold estimate."""
    reservoir = reservoir or ReservoirSpec.vacuum()
    photons = []
    ses = []
    for e in grid:
        model = _machine(e, reservoir, rounds)
        cfg = EnsembleConfig(model, n_traj, _sub_seed(seed, f"threshold/e={e:.6g}"), ("photon",))
        series = run_ensemble(cfg, workers)
        photons.append(series.series["photon"][-1])
        ses.append(series.series["photon_se"][-1])
    est = estimate_threshold(grid, photons)
    return est, np.array(photons), np.array(ses)


def _ground_codes(n_pulses: int) -> tuple[int, ...]:
    ground, _ = obs.brute_force_ground_states(-np.sign(ring_coupling(n_pulses)) * 1.0)
    return tuple(int(c) for c in ground)


def _discrete_sweep(spec, workers, series_param, values, reservoir_of, observable):
    """Shared driver for the success / photon / correlation / EPR sweeps."""
    ov = spec.overrides
    n = int(ov.get("trajectories", _DISC_N))
    seed = int(ov.get("seed", _DEFAULT_SEED))
    rounds = int(ov.get("rounds", 2000))
    default_grid = _P_GRID_LOW if observable in ("photon", "upair") else _P_GRID
    p_grid = tuple(ov.get("p_grid", default_grid))
    est, scan_n, scan_se = scan_threshold(seed, rounds, workers)
    e_th = est.value
    ground = _ground_codes(16)
    tables = [
        (
            f"{spec.figure}_threshold_scan",
            ResultTable(
                {"pump_e": np.array(_THRESHOLD_GRID), "photon": scan_n, "photon_se": scan_se},
                {"figure": spec.figure, "e_threshold": e_th, "unique": est.unique, "version": __version__},
            ),
        )
    ]
    for val in values:
        rows = {"p": [], "pump_e": []}
        out_cols = {}
        for p in p_grid:
            e = p * e_th
            want_upair = observable == "upair"
            model = _machine(e, reservoir_of(val), rounds, upair=want_upair)
            obs_req = ("photon", "configs") + (("upair_var",) if want_upair else ())
            cfg = EnsembleConfig(
                model, n, _sub_seed(seed, f"{spec.figure}/{series_param}={val}/p={p:.6g}"), obs_req
            )
            series = run_ensemble(cfg, workers)
            rows["p"].append(p)
            rows["pump_e"].append(e)
            alive = series.diverged < 0
            if observable == "success":
                s, se = obs.success_probability(series.final_configs, ground)
                out_cols.setdefault("success", []).append(s)
                out_cols.setdefault("success_se", []).append(se)
            elif observable == "photon":
                out_cols.setdefault("photon", []).append(series.series["photon"][-1])
                out_cols.setdefault("photon_se", []).append(series.series["photon_se"][-1])
            elif observable == "corr":
                q = obs.wigner_quadratures(series.final_states[alive], series.config.model.params.mu)
                c, cse = obs.correlation_xx(q, 0, 1)
                out_cols.setdefault("corr_xx", []).append(c)
                out_cols.setdefault("corr_xx_se", []).append(cse)
            elif observable == "upair":
                uv = series.round_series["upair_var"]
                use = series.round_series["upair_var_se"]
                k = int(np.argmin(uv))
                out_cols.setdefault("min_upair_var", []).append(uv[k])
                out_cols.setdefault("min_upair_var_se", []).append(use[k])
                out_cols.setdefault("final_upair_var", []).append(uv[-1])
                out_cols.setdefault("final_upair_var_se", []).append(use[-1])
        cols = {k: np.array(v) for k, v in {**rows, **out_cols}.items()}
        meta = {
            "figure": spec.figure,
            series_param: val,
            "n_trajectories": n,
            "rounds": rounds,
            "e_threshold": e_th,
            "master_seed": seed,
            "version": __version__,
        }
        tables.append((f"{spec.figure}_{series_param}{val:g}", ResultTable(cols, meta)))
    return tables


def _fig10(spec, workers):
    r_values = tuple(spec.overrides.get("r_values", (0.0, 0.3, 0.6, 0.9, 1.2)))
    return _discrete_sweep(
        spec, workers, "r", r_values,
        lambda r: ReservoirSpec.squeezed(r) if r else ReservoirSpec.vacuum(), "photon",
    )


def _fig11(spec, workers):
    r_values = tuple(spec.overrides.get("r_values", (0.0, 0.6, 1.2)))
    return _discrete_sweep(
        spec, workers, "r", r_values,
        lambda r: ReservoirSpec.squeezed(r) if r else ReservoirSpec.vacuum(), "upair",
    )


def _fig12(spec, workers):
    r_values = tuple(spec.overrides.get("r_values", (0.0, 0.3, 0.6, 0.9, 1.2)))
    return _discrete_sweep(
        spec, workers, "r", r_values,
        lambda r: ReservoirSpec.squeezed(r) if r else ReservoirSpec.vacuum(), "success",
    )


def _fig13(spec, workers):
    nth_values = tuple(spec.overrides.get("nth_values", (0.0, 0.02, 1.0, 10.0)))
    return _discrete_sweep(
        spec, workers, "nth", nth_values,
        lambda nth: ReservoirSpec.thermal(nth) if nth else ReservoirSpec.vacuum(), "success",
    )


def _fig14(spec, workers):
    nth_values = tuple(spec.overrides.get("nth_values", (0.0, 1.0, 10.0)))
    return _discrete_sweep(
        spec, workers, "nth", nth_values,
        lambda nth: ReservoirSpec.thermal(nth) if nth else ReservoirSpec.vacuum(), "corr",
    )


_RUNNERS = {
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
    "fig9": _fig9,
    "fig10": _fig10,
    "fig11": _fig11,
    "fig12": _fig12,
    "fig13": _fig13,
    "fig14": _fig14,
}


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> list[Path]:
    """Run one preset and write its CSV tables plus a metadata sidecar."""
    t0 = time.time()
    tables = _RUNNERS[spec.figure](spec, workers)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, table in tables:
        paths.append(write_csv(table, spec.out_dir / f"{name}.csv"))
    sidecar = {
        "figure": spec.figure,
        "overrides": {k: list(v) if isinstance(v, tuple) else v for k, v in spec.overrides.items()},
        "files": [p.name for p in paths],
        "runtime_s": round(time.time() - t0, 3),
        "backend": active_backend(),
        "version": __version__,
    }
    sidecar_path = spec.out_dir / f"{spec.figure}.meta.json"
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return paths + [sidecar_path]


# ---------------------------------------------------------------------------
# Configuration files
# ---------------------------------------------------------------------------

def _expect(mapping, path, allowed):
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")


def _need(mapping, path, key, kind):
    if key not in mapping:
        raise ConfigError(f"{path}.{key}: required")
    val = mapping[key]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is int and isinstance(val, int) and not isinstance(val, bool):
        return int(val)
    if not isinstance(val, kind):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def _parse_reservoir(d, path) -> ReservoirSpec:
    if d is None:
        return ReservoirSpec.vacuum()
    _expect(d, path, ("kind", "n_th", "r"))
    kind = _need(d, path, "kind", str)
    try:
        if kind == "vacuum":
            return ReservoirSpec.vacuum()
        if kind == "thermal":
            return ReservoirSpec.thermal(_need(d, path, "n_th", float))
        if kind == "squeezed":
            return ReservoirSpec.squeezed(_need(d, path, "r", float))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    raise ConfigError(f"{path}.kind: unknown reservoir kind {kind!r}")


def _parse_pump(d, path) -> PumpSchedule:
    _expect(d, path, ("kind", "e_max", "tau_max"))
    kind = _need(d, path, "kind", str)
    try:
        if kind == "linear_ramp":
            return PumpSchedule.linear_ramp(_need(d, path, "e_max", float), _need(d, path, "tau_max", float))
        if kind in ("constant", "abrupt"):
            return PumpSchedule(kind, _need(d, path, "e_max", float))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    raise ConfigError(f"{path}.kind: unknown pump schedule {kind!r}")


def _parse_integrator(d, path) -> IntegratorConfig:
    _expect(d, path, ("dt", "total_time", "sample_every", "sample_times"))
    dt = _need(d, path, "dt", float)
    total = _need(d, path, "total_time", float)
    try:
        if "sample_times" in d:
            return IntegratorConfig(dt, total, tuple(float(t) for t in d["sample_times"]))
        every = _need(d, path, "sample_every", float)
        return IntegratorConfig.regular(dt, total, every)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_continuous_model(d, path):
    allowed = ("kind", "g", "xi", "coupling_sign", "n_modes", "pump", "reservoir", "rate_ratio", "integrator")
    _expect(d, path, allowed)
    kind = d.get("kind", "wigner_two")
    g = float(d.get("g", 0.01))
    xi = float(d.get("xi", 0.6))
    pump = _parse_pump(d.get("pump", {"kind": "linear_ramp", "e_max": 1.5, "tau_max": 200.0}), f"{path}.pump")
    reservoir = _parse_reservoir(d.get("reservoir"), f"{path}.reservoir")
    sign = int(d.get("coupling_sign", -1))
    rates = None
    if kind in ("wigner_five", "positive_p_full"):
        rates = FullModelRates.from_normalized(g, xi, float(d.get("rate_ratio", 100.0)))
    try:
        params = ContinuousParams(
            g=g, xi=xi, pump=pump, coupling_sign=sign, reservoir_central=reservoir, full_rates=rates
        )
        integrator = _parse_integrator(
            d.get("integrator", {"dt": 1e-3, "total_time": 200.0, "sample_every": 1.0}),
            f"{path}.integrator",
        )
        return ContinuousModel(kind, params, integrator, n_modes=int(d.get("n_modes", 2)))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_discrete_model(d, path):
    allowed = (
        "kind", "n_pulses", "pump_e", "mu", "t_out", "t_inj", "psa_gain", "xi_ring",
        "coupling_file", "reservoir", "rounds", "substeps", "inject_before_gain",
        "sample_every", "upair_modes",
    )
    _expect(d, path, allowed)
    n_pulses = int(d.get("n_pulses", 16))
    if "coupling_file" in d:
        coupling = parse_j_file(d["coupling_file"], n_pulses)
    else:
        coupling = ring_coupling(n_pulses, float(d.get("xi_ring", -0.01)))
    rounds = int(d.get("rounds", 2000))
    try:
        params = DiscreteParams(
            n_pulses=n_pulses,
            pump_e=float(d.get("pump_e", 0.05)),
            coupling=coupling,
            mu=float(d.get("mu", 0.01)),
            t_out=float(d.get("t_out", 0.1)),
            t_inj=float(d.get("t_inj", 1e-4)),
            psa_gain=float(d.get("psa_gain", 1.0)),
            reservoir=_parse_reservoir(d.get("reservoir"), f"{path}.reservoir"),
            rounds=rounds,
            substeps=int(d.get("substeps", 1)),
            inject_before_gain=bool(d.get("inject_before_gain", False)),
        )
        every = int(d.get("sample_every", rounds))
        sample_rounds = tuple(range(0, rounds + 1, every)) if rounds % every == 0 else (0, rounds)
        upair = d.get("upair_modes")
        return DiscreteModel(params, sample_rounds, tuple(upair) if upair else None)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_config(source) -> EnsembleConfig:
    """Parse and validate an ensemble configuration (JSON file, text or dict).

    Unknown keys are rejected; violations are reported with their key path.
    """
    if isinstance(source, dict):
        raw = source
    else:
        text = Path(source).read_text(encoding="utf-8") if Path(str(source)).exists() else str(source)
        raw = json.loads(text) if text.strip() else {}
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    allowed = ("kind", "model", "n_trajectories", "master_seed", "observables", "divergence_cap")
    _expect(raw, "<root>", allowed)
    if raw.get("kind", "ensemble") != "ensemble":
        raise ConfigError("<root>.kind: expected 'ensemble'")
    model_d = raw.get("model", {})
    if not isinstance(model_d, dict):
        raise ConfigError("model: expected an object")
    mkind = model_d.get("kind", "wigner_two")
    if mkind == "discrete":
        model = _parse_discrete_model(model_d, "model")
    else:
        model = _parse_continuous_model(model_d, "model")
    if "observables" in raw:
        observables = tuple(raw["observables"])
    elif model.kind == "discrete":
        observables = ("photon", "configs")
    elif model.kind == "wigner_ring":
        observables = ("epr_ring", "photon")
    else:
        observables = ("epr_pair", "photon")
    try:
        return EnsembleConfig(
            model=model,
            n_trajectories=int(raw.get("n_trajectories", 1000)),
            master_seed=int(raw.get("master_seed", 0)),
            observables=observables,
            divergence_cap=float(raw.get("divergence_cap", 1e3)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_j_file(path, n: int) -> np.ndarray:
    """Read whitespace-separated coupling triplets ``i j J_ij`` (zero-based)."""
    j = np.zeros((n, n))
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.split("#")[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 3:
            raise ConfigError(f"{path}:{lineno}: expected 'i j J_ij'")
        a, b, val = int(parts[0]), int(parts[1]), float(parts[2])
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise ConfigError(f"{path}:{lineno}: indices out of range for n={n}")
        j[a, b] = val
        j[b, a] = val
    return j
