"""Reproducible random-number streams and Wiener-increment conventions.

Every stochastic object in the simulator draws from a stream identified by
``(master_seed, trajectory_index, stream_label)``.  Distinct identifiers give
statistically independent streams; identical identifiers give bit-identical
sequences on every run and for any worker count, which is what makes whole
ensembles reproducible regardless of how trajectories are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RngStream",
    "WienerConvention",
    "derive_stream",
    "sample_complex_wiener",
    "sample_real_wiener",
]

_MAX_SEED = 2**64


def _label_entropy(label: str) -> int:
    # Stable across processes and Python versions (unlike hash()).
    data = label.encode("utf-8")
    if not data:
        raise ValueError("stream_label must be a non-empty string")
    return int.from_bytes(data, "little")


@dataclass(frozen=True)
class RngStream:
    """One independent, reproducible random stream.

    The underlying bit generator is SFC64 seeded through a SeedSequence built
    from the three identifying fields, so equality of the fields implies
    equality of the produced bits.
    """

    master_seed: int
    trajectory_index: int
    stream_label: str
    generator: np.random.Generator = field(repr=False, compare=False)


def derive_stream(master_seed: int, trajectory_index: int, stream_label: str) -> RngStream:
    """Create the stream for ``(master_seed, trajectory_index, stream_label)``."""
    if not 0 <= int(master_seed) < _MAX_SEED:
        raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    if trajectory_index < 0:
        raise ValueError(f"trajectory_index must be nonnegative, got {trajectory_index}")
    ss = np.random.SeedSequence(
        entropy=(int(master_seed), int(trajectory_index), _label_entropy(stream_label))
    )
    return RngStream(
        master_seed=int(master_seed),
        trajectory_index=int(trajectory_index),
        stream_label=stream_label,
        generator=np.random.Generator(np.random.SFC64(ss)),
    )


@dataclass(frozen=True)
class WienerConvention:
    """Variance convention for complex Wiener increments over a step ``dt``.

    The default increment has independent real and imaginary parts, each a
    zero-mean Gaussian of variance ``dt/2``.  That normalisation makes the
    empty-cavity stationary quadrature variance equal to the vacuum value 1/4.
    A non-vacuum reservoir rescales the per-quadrature variances through
    ``quad_var_scale_x`` and ``quad_var_scale_p`` (vacuum corresponds to 1, 1).
    """

    dt: float
    quad_var_scale_x: float = 1.0
    quad_var_scale_p: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.quad_var_scale_x < 0 or self.quad_var_scale_p < 0:
            raise ValueError("quadrature variance scales must be nonnegative")

    @classmethod
    def for_reservoir(cls, reservoir, dt: float) -> "WienerConvention":
        """Convention whose quadrature variances are scaled to a reservoir's.

        The scale factors are the reservoir quadrature variances in units of
        the vacuum value 1/4.
        """
        from .reservoirs import quadrature_variances

        vx, vp = quadrature_variances(reservoir)
        return cls(dt=dt, quad_var_scale_x=4.0 * vx, quad_var_scale_p=4.0 * vp)

    @property
    def sigma_x(self) -> float:
        return float(np.sqrt(self.dt / 2.0 * self.quad_var_scale_x))

    @property
    def sigma_p(self) -> float:
        return float(np.sqrt(self.dt / 2.0 * self.quad_var_scale_p))


def sample_complex_wiener(convention: WienerConvention, stream: RngStream, size=None):
    """Draw complex Wiener increments under the given convention.

    Returns a scalar for ``size=None``, else an array of the given shape.
    Real parts are drawn before imaginary parts for each increment.
    """
    n = 1 if size is None else int(np.prod(size))
    z = stream.generator.standard_normal((n, 2))
    dw = convention.sigma_x * z[:, 0] + 1j * convention.sigma_p * z[:, 1]
    if size is None:
        return complex(dw[0])
    return dw.reshape(size)


def sample_real_wiener(dt: float, stream: RngStream, size=None):
    """Real Wiener increments of variance ``dt`` (doubled-phase-space models)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    z = stream.generator.standard_normal(size if size is not None else ())
    return np.sqrt(dt) * z
