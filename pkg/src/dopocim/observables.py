"""Ensemble estimators for quadrature moments, EPR criteria, spins and
success probabilities.

Moment corrections depend on the phase-space representation:

* ``wigner``: sampled moments are symmetrically ordered, so quadrature
  variances are plain sample variances and photon numbers subtract the
  half-photon zero-point term.
* ``positive_p``: sampled moments are normally ordered.  Quadrature variables
  are built from the doubled amplitudes, c = (alpha + beta)/2 and
  s = (alpha - beta)/(2i), and each quadrature variance gains the +1/4
  ordering correction (so an EPR variance over two modes gains +1/2, a ring
  sum over N modes gains +N/4).

Variance-type standard errors are jackknife-over-trajectories; probabilities
use the binomial formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureSamples",
    "wigner_quadratures",
    "positive_p_quadratures",
    "variance_x",
    "variance_p",
    "epr_two_variances",
    "epr_ring_variances",
    "correlation_xx",
    "correlation_pp",
    "photon_number",
    "spins",
    "pack_spins",
    "unpack_spins",
    "spin_string",
    "ProbabilityTable",
    "post_select",
    "config_probabilities",
    "success_probability",
    "ising_energy",
    "brute_force_ground_states",
]

WIGNER = "wigner"
POSITIVE_P = "positive_p"


@dataclass(frozen=True)
class QuadratureSamples:
    """Per-trajectory quadrature samples of an n-mode ensemble.

    ``c`` and ``s`` have shape (n_traj, n_modes); real for the Wigner
    representation, complex for the doubled representation (their ensemble
    means are real).  ``photon_terms`` carries per-mode photon-number
    contributions before any ordering correction.
    """

    representation: str
    c: np.ndarray
    s: np.ndarray
    photon_terms: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.c.shape[1]

    @property
    def correction(self) -> float:
        return 0.25 if self.representation == POSITIVE_P else 0.0


def wigner_quadratures(amps: np.ndarray, scale: float = 1.0) -> QuadratureSamples:
    """Quadratures of Wigner amplitudes, unnormalised by ``scale`` (g or mu)."""
    a = np.asarray(amps) / scale
    if a.ndim == 1:
        a = a[:, None]
    return QuadratureSamples(WIGNER, a.real.copy(), a.imag.copy(), np.abs(a) ** 2 - 0.5)


def positive_p_quadratures(alpha: np.ndarray, beta: np.ndarray, scale: float = 1.0) -> QuadratureSamples:
    a = np.asarray(alpha) / scale
    b = np.asarray(beta) / scale
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    return QuadratureSamples(POSITIVE_P, (a + b) / 2.0, (a - b) / 2j, (b * a).real)


# ---------------------------------------------------------------------------
# Variance-type estimators with jackknife standard errors
# ---------------------------------------------------------------------------

def _variance_stat(values: np.ndarray, correction: float) -> tuple[float, float]:
    """Variance of a (possibly complex) derived quadrature variable.

    Computes Re<v^2> - (Re<v>)^2 + correction together with its jackknife
    standard error.  For real inputs this is the plain sample variance.
    """
    v = np.asarray(values)
    n = v.shape[0]
    if n < 2:
        raise ValueError("need at least two trajectories")
    s1 = v.sum(axis=0)
    s2 = (v * v).sum(axis=0)
    est = (s2 / n).real - (s1 / n).real ** 2 + correction
    loo = ((s2 - v * v) / (n - 1)).real - ((s1 - v) / (n - 1)).real ** 2 + correction
    se = np.sqrt((n - 1) / n * ((loo - loo.mean(axis=0)) ** 2).sum(axis=0))
    return float(est), float(se)


def variance_x(samples: QuadratureSamples, mode: int) -> tuple[float, float]:
    """In-phase quadrature variance of one mode, with standard error."""
    return _variance_stat(samples.c[:, mode], samples.correction)


def variance_p(samples: QuadratureSamples, mode: int) -> tuple[float, float]:
    return _variance_stat(samples.s[:, mode], samples.correction)


def epr_two_variances(samples: QuadratureSamples, modes: tuple[int, int] = (0, 1)):
    """EPR variances of a mode pair: u = x_i + x_j and v = p_i - p_j.

    Returns ``((du2, se), (dv2, se), (sum, se))``.  Two independent vacua sit
    exactly at the inseparability boundary sum = 1.
    """
    i, j = modes
    u = samples.c[:, i] + samples.c[:, j]
    v = samples.s[:, i] - samples.s[:, j]
    corr = 2.0 * samples.correction
    du = _variance_stat(u, corr)
    dv = _variance_stat(v, corr)
    total = _variance_stat_sum(u, v, corr)
    return du, dv, total


def epr_ring_variances(samples: QuadratureSamples):
    """Collective EPR variances of an even-N ring.

    u = sum_j x_j and v = sum_j (-1)^j p_j; the separability bound of the
    total is N/2.  Odd mode counts are rejected.
    """
    n_modes = samples.n_modes
    if n_modes % 2 != 0:
        raise ValueError("ring EPR indicator requires an even number of modes")
    alt = np.resize([1.0, -1.0], n_modes)
    u = samples.c.sum(axis=1)
    v = (samples.s * alt).sum(axis=1)
    corr = n_modes * samples.correction
    du = _variance_stat(u, corr)
    dv = _variance_stat(v, corr)
    total = _variance_stat_sum(u, v, corr)
    return du, dv, total


def _variance_stat_sum(u, v, corr_each) -> tuple[float, float]:
    """Jackknife for the summed statistic Var(u) + Var(v) + 2*corr."""
    n = u.shape[0]
    su1, su2 = u.sum(), (u * u).sum()
    sv1, sv2 = v.sum(), (v * v).sum()
    est = (su2 / n).real - (su1 / n).real ** 2 + (sv2 / n).real - (sv1 / n).real ** 2 + 2 * corr_each
    loo = (
        ((su2 - u * u) / (n - 1)).real
        - ((su1 - u) / (n - 1)).real ** 2
        + ((sv2 - v * v) / (n - 1)).real
        - ((sv1 - v) / (n - 1)).real ** 2
        + 2 * corr_each
    )
    se = np.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum())
    return float(est), float(se)


def _correlation(x: np.ndarray, y: np.ndarray, correction: float) -> tuple[float, float]:
    """Normalised covariance with ordering-corrected denominators + jackknife."""
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two trajectories")

    def stat(sx, sy, sxx, syy, sxy, m):
        vx = (sxx / m).real - (sx / m).real ** 2 + correction
        vy = (syy / m).real - (sy / m).real ** 2 + correction
        cov = (sxy / m).real - (sx / m).real * (sy / m).real
        return cov / np.sqrt(vx * vy)

    sx, sy = x.sum(), y.sum()
    sxx, syy, sxy = (x * x).sum(), (y * y).sum(), (x * y).sum()
    denom_x = (sxx / n).real - (sx / n).real ** 2 + correction
    denom_y = (syy / n).real - (sy / n).real ** 2 + correction
    if denom_x <= 0 or denom_y <= 0:
        raise ValueError("degenerate variance: correlation undefined")
    est = stat(sx, sy, sxx, syy, sxy, n)
    loo = stat(sx - x, sy - y, sxx - x * x, syy - y * y, sxy - x * y, n - 1)
    se = np.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum())
    return float(est), float(se)


def correlation_xx(samples: QuadratureSamples, i: int, j: int) -> tuple[float, float]:
    """Normalised in-phase correlation between modes i and j, in [-1, 1]."""
    return _correlation(samples.c[:, i], samples.c[:, j], samples.correction)


def correlation_pp(samples: QuadratureSamples, i: int, j: int) -> tuple[float, float]:
    return _correlation(samples.s[:, i], samples.s[:, j], samples.correction)


def photon_number(samples: QuadratureSamples, mode: int | None = None) -> tuple[float, float]:
    """Mean photon number of one mode (or pooled over modes), with SE."""
    terms = samples.photon_terms if mode is None else samples.photon_terms[:, mode : mode + 1]
    per_traj = terms.mean(axis=1)
    n = per_traj.shape[0]
    return float(per_traj.mean()), float(per_traj.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0


# ---------------------------------------------------------------------------
# Spin readout, post-selection, success probability
# ---------------------------------------------------------------------------

def spins(c_values: np.ndarray) -> np.ndarray:
    """Spin configuration from in-phase amplitudes: sign(c), ties map to +1."""
    c = np.real(np.asarray(c_values))
    return np.where(c >= 0.0, 1, -1).astype(np.int8)


def pack_spins(signs: np.ndarray) -> np.ndarray:
    """Pack +-1 spin rows into uint32 codes (mode 0 is the least-significant bit)."""
    s = np.asarray(signs)
    n = s.shape[-1]
    if n > 32:
        raise ValueError("packing supports at most 32 spins")
    bits = (s > 0).astype(np.uint32)
    return (bits << np.arange(n, dtype=np.uint32)).sum(axis=-1).astype(np.uint32)


def unpack_spins(code: int, n: int) -> np.ndarray:
    return np.where((int(code) >> np.arange(n)) & 1 == 1, 1, -1).astype(np.int8)


def spin_string(code: int, n: int) -> str:
    """Render a packed configuration as '+-' characters, mode 0 first."""
    return "".join("+" if b else "-" for b in ((int(code) >> k) & 1 for k in range(n)))


@dataclass(frozen=True)
class ProbabilityTable:
    """Configuration probabilities with binomial standard errors."""

    n_total: int
    probs: dict  # packed config -> (probability, standard error)

    def total(self) -> float:
        return float(sum(p for p, _ in self.probs.values()))

    def get(self, code: int) -> tuple[float, float]:
        return self.probs.get(int(code), (0.0, 0.0))


def config_probabilities(configs: np.ndarray) -> ProbabilityTable:
    """Frequency table of packed spin configurations."""
    configs = np.asarray(configs, dtype=np.uint32)
    n = configs.shape[0]
    if n == 0:
        raise ValueError("empty configuration sample")
    codes, counts = np.unique(configs, return_counts=True)
    probs = {}
    for code, k in zip(codes, counts):
        p = k / n
        probs[int(code)] = (float(p), float(np.sqrt(p * (1.0 - p) / n)))
    return ProbabilityTable(n_total=n, probs=probs)


def post_select(config_series: np.ndarray, final_predicate, sample_indices=None):
    """Conditioned configuration statistics along trajectories.

    ``config_series`` has shape (n_traj, n_times) of packed configurations;
    the final column is the conditioning measurement.  ``final_predicate``
    is a packed code, a set of codes, or a callable on codes.  Returns
    ``(survivor_mask, [ProbabilityTable per requested sample index])``;
    an empty survivor set raises, as the conditional law is undefined.
    """
    series = np.asarray(config_series, dtype=np.uint32)
    final = series[:, -1]
    if callable(final_predicate):
        mask = np.fromiter((bool(final_predicate(int(c))) for c in final), dtype=bool, count=len(final))
    elif isinstance(final_predicate, (set, frozenset, list, tuple, np.ndarray)):
        mask = np.isin(final, np.asarray(sorted(int(c) for c in final_predicate), dtype=np.uint32))
    else:
        mask = final == np.uint32(final_predicate)
    if not mask.any():
        raise ValueError("post-selection left no surviving trajectories")
    survivors = series[mask]
    idx = range(series.shape[1]) if sample_indices is None else sample_indices
    return mask, [config_probabilities(survivors[:, k]) for k in idx]


def success_probability(final_configs: np.ndarray, ground_set) -> tuple[float, float]:
    """Fraction of trajectories ending in a ground configuration, binomial SE."""
    ground = np.asarray(sorted(int(c) for c in ground_set), dtype=np.uint32)
    if ground.size == 0:
        raise ValueError("ground set must be nonempty")
    finals = np.asarray(final_configs, dtype=np.uint32)
    n = finals.shape[0]
    p = float(np.isin(finals, ground).mean())
    return p, float(np.sqrt(p * (1.0 - p) / n))


# ---------------------------------------------------------------------------
# Ising oracle
# ---------------------------------------------------------------------------

def ising_energy(signs: np.ndarray, j_matrix: np.ndarray) -> float:
    """Energy sum_{i<j} J_ij s_i s_j of one configuration.

    The convention pairs with the machine feedback: anti-ferromagnetic bonds
    have J > 0 (and coupling xi < 0), so the even ring's ground states are
    the two alternating patterns.
    """
    s = np.asarray(signs, dtype=float)
    j = np.asarray(j_matrix, dtype=float)
    if not np.allclose(j, j.T):
        raise ValueError("coupling matrix must be symmetric")
    return float(0.5 * s @ j @ s - 0.5 * np.trace(j))


def brute_force_ground_states(j_matrix: np.ndarray, max_n: int = 24):
    """Exhaustive minimum-energy configuration set for n <= max_n spins.

    Returns ``(codes, energy)`` where codes is the sorted array of packed
    ground configurations.
    """
    j = np.asarray(j_matrix, dtype=float)
    n = j.shape[0]
    if n > max_n or n > 24:
        raise ValueError(f"brute force enumeration limited to {min(max_n, 24)} spins, got {n}")
    if not np.allclose(j, j.T):
        raise ValueError("coupling matrix must be symmetric")
    total = 2**n
    block = min(total, 1 << 18)
    e_min = np.inf
    ground_blocks = []
    for lo in range(0, total, block):
        codes = np.arange(lo, min(lo + block, total), dtype=np.uint32)
        signs = np.where((codes[:, None] >> np.arange(n)) & 1 == 1, 1.0, -1.0)
        energies = 0.5 * ((signs @ j) * signs).sum(axis=1) - 0.5 * np.trace(j)
        blk_min = energies.min()
        atol = 1e-9 * max(1.0, abs(min(e_min, blk_min)))
        if blk_min < e_min - atol:
            e_min = blk_min
            ground_blocks = [codes[np.isclose(energies, e_min, rtol=0.0, atol=atol)]]
        elif blk_min <= e_min + atol:
            e_min = min(e_min, blk_min)
            ground_blocks.append(codes[np.isclose(energies, e_min, rtol=0.0, atol=atol)])
    return np.concatenate(ground_blocks), float(e_min)
