"""Gaussian reservoirs incident on coupler open ports.

Three families: vacuum, thermal with mean occupation ``n_th``, and squeezed
vacuum with squeezing parameter ``r``.  Quadrature variances follow the
symmetric-ordering convention in which the vacuum has variance 1/4 per
quadrature; the squeezing axis is fixed to the in-phase (x) quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import RngStream

__all__ = ["ReservoirSpec", "quadrature_variances", "sample_noise_field"]


@dataclass(frozen=True)
class ReservoirSpec:
    kind: str = "vacuum"  # "vacuum" | "thermal" | "squeezed"
    n_th: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        if self.kind not in ("vacuum", "thermal", "squeezed"):
            raise ValueError(f"unknown reservoir kind {self.kind!r}")
        if self.n_th < 0:
            raise ValueError(f"thermal occupation must be nonnegative, got {self.n_th}")
        if self.kind == "vacuum" and (self.n_th != 0.0 or self.r != 0.0):
            raise ValueError("vacuum reservoir takes no parameters")

    @classmethod
    def vacuum(cls) -> "ReservoirSpec":
        return cls("vacuum")

    @classmethod
    def thermal(cls, n_th: float) -> "ReservoirSpec":
        return cls("thermal", n_th=float(n_th))

    @classmethod
    def squeezed(cls, r: float) -> "ReservoirSpec":
        return cls("squeezed", r=float(r))


def quadrature_variances(spec: ReservoirSpec) -> tuple[float, float]:
    """Per-quadrature variances ``(v_x, v_p)`` of the reservoir field.

    vacuum: (1/4, 1/4); squeezed(r): (e^{-2r}/4, e^{2r}/4);
    thermal(n_th): ((2 n_th + 1)/4,) * 2.
    """
    if spec.kind == "vacuum":
        return 0.25, 0.25
    if spec.kind == "squeezed":
        return float(np.exp(-2.0 * spec.r) / 4.0), float(np.exp(2.0 * spec.r) / 4.0)
    v = (2.0 * spec.n_th + 1.0) / 4.0
    return v, v


def sample_noise_field(spec: ReservoirSpec, stream: RngStream, size=None):
    """Draw the complex noise field f incident from an open port.

    Re(f) and Im(f) are independent zero-mean Gaussians with the spec's
    quadrature variances; one independent draw per pulse per round trip.
    """
    vx, vp = quadrature_variances(spec)
    n = 1 if size is None else int(np.prod(size))
    z = stream.generator.standard_normal((n, 2))
    f = np.sqrt(vx) * z[:, 0] + 1j * np.sqrt(vp) * z[:, 1]
    if size is None:
        return complex(f[0])
    return f.reshape(size)
