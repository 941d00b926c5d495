"""Pure-numpy fallback kernels.

Each kernel advances a batch of trajectories through the full path of one
model and records complex state samples at requested step indices.  The
compiled Cython kernels implement exactly the same maps and consume exactly
the same random stream: per trajectory, a single float32 standard-normal
stream read in a fixed per-step order.

Draw order per step (float32 standard normals):

* wigner_two:   loc1_re, loc1_im, loc2_re, loc2_im [, c_re, c_im]
* wigner_ring:  loc_0_re, loc_0_im, ..., loc_{N-1}_im [, c_0_re, ..., c_{N-1}_im]
* positive_p_two:  a1, b1, a2, b2
* wigner_five:  s1_re, s1_im, s2_re, s2_im, p1_re, p1_im, p2_re, p2_im, c_re, c_im
* positive_p_full: as1, bs1, as2, bs2
* discrete (per round): f_0_re, f_0_im, ..., f_{N-1}_im, then per gain
  sub-step: w_0_re, w_0_im, ..., w_{N-1}_im

The bracketed coupling-path draws are consumed only when xi > 0.  The local
Wigner noise combines the loss and pump contributions into one isotropic
complex draw of per-quadrature variance (base + 2|A|^2) dt/2, which is
distribution-identical to drawing them separately.

Trajectories are flagged divergent at sample times when any component is
non-finite or exceeds the cap; a flagged trajectory's subsequent samples stay
NaN and its state is zeroed to keep the batch arithmetic clean.
"""

from __future__ import annotations

import numpy as np

BLOCK_FLOATS = 1 << 24  # total float32 draw buffer across the batch


def _block_steps(kk, d):
    return max(1, BLOCK_FLOATS // max(1, kk * d))


def _fill_block(gens, buf, n_steps, d):
    """Fill buf[k, :n_steps, :d] from each trajectory's own stream."""
    for k, gen in enumerate(gens):
        gen.standard_normal(dtype=np.float32, out=buf[k, :n_steps, :d])


def _sample_mask(a, cap):
    m = np.abs(a)
    return ~np.all(np.isfinite(m) & (m <= cap), axis=-1)


class _Recorder:
    """Shared sampling / divergence bookkeeping over a batch."""

    def __init__(self, kk, n_modes, sample_steps, cap):
        self.samples = np.full((kk, len(sample_steps), n_modes), np.nan, dtype=np.complex128)
        self.diverged = np.full(kk, -1, dtype=np.int64)
        self.steps = np.asarray(sample_steps, dtype=np.int64)
        self.cap = cap
        self.ptr = 0

    def record(self, step, a):
        if self.ptr < len(self.steps) and self.steps[self.ptr] == step:
            bad = _sample_mask(a, self.cap)
            new = bad & (self.diverged < 0)
            self.diverged[new] = step
            a[new] = 0.0
            ok = self.diverged < 0
            self.samples[ok, self.ptr, :] = a[ok]
            self.ptr += 1


def run_wigner_two(gens, a0, e_steps, xi, g, dt, sx, sp, coupling_sign, sample_steps, cap):
    kk = len(gens)
    a = np.array(a0, dtype=np.complex128)
    s = len(e_steps)
    rec = _Recorder(kk, 2, sample_steps, cap)
    rec.record(0, a)
    with_c = xi > 0.0
    d = 6 if with_c else 4
    sq = np.sqrt(dt / 2.0)
    sxr, spr = np.sqrt(sx), np.sqrt(sp)
    sxi = np.sqrt(xi)
    cxi = coupling_sign * xi
    c2s = -float(coupling_sign)
    base = 1.0 - xi
    block = _block_steps(kk, d)
    buf = np.empty((kk, block, d), dtype=np.float32)
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, s, block):
            nb = min(block, s - lo)
            _fill_block(gens, buf, nb, d)
            for b in range(nb):
                i = lo + b
                e = e_steps[i]
                z = buf[:, b, :]
                a1, a2 = a[:, 0], a[:, 1]
                if with_c:
                    cw = sq * (sxr * z[:, 4] + 1j * spr * z[:, 5])
                else:
                    cw = 0.0
                n1 = g * (np.sqrt(base + 2.0 * np.abs(a1) ** 2) * sq * (z[:, 0] + 1j * z[:, 1]) + sxi * cw)
                n2 = g * (np.sqrt(base + 2.0 * np.abs(a2) ** 2) * sq * (z[:, 2] + 1j * z[:, 3]) + c2s * sxi * cw)
                d1 = (-a1 + (e - a1 * a1) * np.conj(a1) + cxi * a2) * dt + n1
                d2 = (-a2 + (e - a2 * a2) * np.conj(a2) + cxi * a1) * dt + n2
                a[:, 0] += d1
                a[:, 1] += d2
                rec.record(i + 1, a)
    return rec.samples, rec.diverged


def run_wigner_ring(gens, a0, e_steps, xi, g, dt, sx, sp, coupling_sign, sample_steps, cap):
    kk = len(gens)
    a = np.array(a0, dtype=np.complex128)
    n = a.shape[1]
    s = len(e_steps)
    rec = _Recorder(kk, n, sample_steps, cap)
    rec.record(0, a)
    with_c = xi > 0.0
    d = 4 * n if with_c else 2 * n
    sq = np.sqrt(dt / 2.0)
    sxr, spr = np.sqrt(sx), np.sqrt(sp)
    sxi = np.sqrt(xi)
    cxi = coupling_sign * xi
    pair_sign = -float(coupling_sign)
    base = 1.0 - 2.0 * xi
    block = _block_steps(kk, d)
    buf = np.empty((kk, block, d), dtype=np.float32)
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, s, block):
            nb = min(block, s - lo)
            _fill_block(gens, buf, nb, d)
            for b in range(nb):
                i = lo + b
                e = e_steps[i]
                z = buf[:, b, :]
                loc = z[:, : 2 * n].reshape(kk, n, 2)
                noise = g * np.sqrt(base + 2.0 * np.abs(a) ** 2) * sq * (loc[:, :, 0] + 1j * loc[:, :, 1])
                if with_c:
                    zc = z[:, 2 * n :].reshape(kk, n, 2)
                    cw = sq * (sxr * zc[:, :, 0] + 1j * spr * zc[:, :, 1])
                    noise = noise + g * sxi * (np.roll(cw, -1, axis=1) + pair_sign * cw)
                nbr = np.roll(a, 1, axis=1) + np.roll(a, -1, axis=1)
                a += (-a + (e - a * a) * np.conj(a) + cxi * nbr) * dt + noise
                rec.record(i + 1, a)
    return rec.samples, rec.diverged


def run_positive_p_two(gens, a0, e_steps, xi, g, dt, coupling_sign, sample_steps, cap):
    kk = len(gens)
    a = np.array(a0, dtype=np.complex128)  # columns: A1, B1, A2, B2
    s = len(e_steps)
    rec = _Recorder(kk, 4, sample_steps, cap)
    rec.record(0, a)
    sqdt = np.sqrt(dt)
    cxi = coupling_sign * xi
    block = _block_steps(kk, 4)
    buf = np.empty((kk, block, 4), dtype=np.float32)
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, s, block):
            nb = min(block, s - lo)
            _fill_block(gens, buf, nb, 4)
            for b in range(nb):
                i = lo + b
                e = e_steps[i]
                z = buf[:, b, :]
                sq_amp = np.sqrt(e - a * a)  # principal branch, complex
                partner = a[:, [1, 0, 3, 2]]
                other = a[:, [2, 3, 0, 1]]
                a += (
                    (-a + (e - a * a) * partner + cxi * other) * dt
                    + g * sq_amp * (sqdt * z.astype(np.float64))
                )
                rec.record(i + 1, a)
    return rec.samples, rec.diverged


def run_wigner_five(
    gens, a0, eps_steps, gamma_s, gamma_p, gamma_c, kappa, zeta, coupling_sign, dt, sx, sp, sample_steps, cap
):
    kk = len(gens)
    a = np.array(a0, dtype=np.complex128)  # columns: s1, s2, p1, p2, c
    s = len(eps_steps)
    rec = _Recorder(kk, 5, sample_steps, cap)
    rec.record(0, a)
    sq = np.sqrt(dt / 2.0)
    sxr, spr = np.sqrt(sx), np.sqrt(sp)
    rs, rp, rc = np.sqrt(gamma_s), np.sqrt(gamma_p), np.sqrt(gamma_c)
    e_ph = float(coupling_sign)
    block = _block_steps(kk, 10)
    buf = np.empty((kk, block, 10), dtype=np.float32)
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, s, block):
            nb = min(block, s - lo)
            _fill_block(gens, buf, nb, 10)
            for b in range(nb):
                i = lo + b
                eps = eps_steps[i]
                z = buf[:, b, :]
                s1, s2, p1, p2, c = a.T
                ds1 = (-gamma_s * s1 + kappa * p1 * np.conj(s1) + zeta * c) * dt + rs * sq * (z[:, 0] + 1j * z[:, 1])
                ds2 = (-gamma_s * s2 + kappa * p2 * np.conj(s2) - zeta * e_ph * c) * dt + rs * sq * (z[:, 2] + 1j * z[:, 3])
                dp1 = (-gamma_p * p1 - 0.5 * kappa * s1 * s1 + eps) * dt + rp * sq * (z[:, 4] + 1j * z[:, 5])
                dp2 = (-gamma_p * p2 - 0.5 * kappa * s2 * s2 + eps) * dt + rp * sq * (z[:, 6] + 1j * z[:, 7])
                dc = (-gamma_c * c - zeta * s1 + zeta * e_ph * s2) * dt + rc * sq * (sxr * z[:, 8] + 1j * spr * z[:, 9])
                a[:, 0] += ds1
                a[:, 1] += ds2
                a[:, 2] += dp1
                a[:, 3] += dp2
                a[:, 4] += dc
                rec.record(i + 1, a)
    return rec.samples, rec.diverged


def run_positive_p_full(
    gens, a0, eps_steps, gamma_s, gamma_p, gamma_c, kappa, zeta, coupling_sign, dt, sample_steps, cap
):
    kk = len(gens)
    a = np.array(a0, dtype=np.complex128)
    # columns: as1, bs1, as2, bs2, ap1, bp1, ap2, bp2, ac, bc
    s = len(eps_steps)
    rec = _Recorder(kk, 10, sample_steps, cap)
    rec.record(0, a)
    sqdt = np.sqrt(dt)
    e_ph = float(coupling_sign)
    block = _block_steps(kk, 4)
    buf = np.empty((kk, block, 4), dtype=np.float32)
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, s, block):
            nb = min(block, s - lo)
            _fill_block(gens, buf, nb, 4)
            for b in range(nb):
                i = lo + b
                eps = eps_steps[i]
                z = buf[:, b, :].astype(np.float64)
                as1, bs1, as2, bs2, ap1, bp1, ap2, bp2, ac, bc = a.T
                sig = a[:, :4]
                pump = a[:, 4:8]
                amp = np.sqrt(kappa * pump)
                d_sig = np.empty_like(sig)
                d_sig[:, 0] = (-gamma_s * as1 + kappa * ap1 * bs1 + zeta * ac) * dt
                d_sig[:, 1] = (-gamma_s * bs1 + kappa * bp1 * as1 + zeta * bc) * dt
                d_sig[:, 2] = (-gamma_s * as2 + kappa * ap2 * bs2 - zeta * e_ph * ac) * dt
                d_sig[:, 3] = (-gamma_s * bs2 + kappa * bp2 * as2 - zeta * e_ph * bc) * dt
                d_sig += amp * (sqdt * z)
                d_pump = np.empty_like(pump)
                d_pump[:, 0] = (-gamma_p * ap1 - 0.5 * kappa * as1 * as1 + eps) * dt
                d_pump[:, 1] = (-gamma_p * bp1 - 0.5 * kappa * bs1 * bs1 + eps) * dt
                d_pump[:, 2] = (-gamma_p * ap2 - 0.5 * kappa * as2 * as2 + eps) * dt
                d_pump[:, 3] = (-gamma_p * bp2 - 0.5 * kappa * bs2 * bs2 + eps) * dt
                dac = (-gamma_c * ac - zeta * as1 + zeta * e_ph * as2) * dt
                dbc = (-gamma_c * bc - zeta * bs1 + zeta * e_ph * bs2) * dt
                a[:, :4] += d_sig
                a[:, 4:8] += d_pump
                a[:, 8] += dac
                a[:, 9] += dbc
                rec.record(i + 1, a)
    return rec.samples, rec.diverged


def run_discrete(
    gens,
    a0,
    pump_e,
    mu,
    t_out,
    t_inj,
    substeps,
    inject_before_gain,
    vx,
    vp,
    coupling,
    rounds,
    sample_rounds,
    upair_i,
    upair_j,
    upair_sign,
    cap,
):
    kk = len(gens)
    a = np.array(a0, dtype=np.complex128)
    n = a.shape[1]
    rec = _Recorder(kk, n, sample_rounds, cap)
    rec.record(0, a)
    want_upair = upair_i >= 0
    upair = np.full((kk, rounds), np.nan) if want_upair else None
    st, sr = np.sqrt(t_out), np.sqrt(1.0 - t_out)
    k_meas = sr / st
    sti = np.sqrt(1.0 - t_inj)
    svx, svp = np.sqrt(vx), np.sqrt(vp)
    m = substeps
    dt = 1.0 / m
    sq = np.sqrt(dt / 2.0)
    gnoise = np.sqrt(2.0) * mu
    cpl = np.asarray(coupling, dtype=float)
    d = 2 * n + 2 * n * m
    block = _block_steps(kk, d)
    buf = np.empty((kk, block, d), dtype=np.float32)
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, rounds, block):
            nb = min(block, rounds - lo)
            _fill_block(gens, buf, nb, d)
            for b in range(nb):
                t = lo + b
                z = buf[:, b, :]
                zf = z[: , : 2 * n].reshape(kk, n, 2)
                f = mu * (svx * zf[:, :, 0] + 1j * svp * zf[:, :, 1])
                ct = a.real - k_meas * f.real
                a = sr * a + st * f
                fb = ct @ cpl.T
                if inject_before_gain:
                    a = sti * a + fb
                for ss in range(m):
                    zw = z[:, 2 * n + 2 * n * ss : 2 * n + 2 * n * (ss + 1)].reshape(kk, n, 2)
                    dw = sq * (zw[:, :, 0] + 1j * zw[:, :, 1])
                    a = a + (pump_e - a * a) * np.conj(a) * dt + gnoise * np.conj(a) * dw
                if not inject_before_gain:
                    a = sti * a + fb
                if want_upair:
                    alive = rec.diverged < 0
                    upair[alive, t] = (a[alive, upair_i].real + upair_sign * a[alive, upair_j].real) / mu
                rec.record(t + 1, a)
    return rec.samples, upair, rec.diverged
