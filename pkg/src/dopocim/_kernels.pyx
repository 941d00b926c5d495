# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trajectory kernels.

Function signatures, model maps and random-stream consumption match
``_kernels_py`` exactly; see that module's docstring for the per-step draw
order contract.  Each trajectory draws float32 standard normals from its own
generator through the numpy bit-generator C interface, refilled in blocks.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport fabs, isfinite, sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal_fill_f

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)

_BLOCK_FLOATS = 1 << 16


cdef inline bitgen_t* _bitgen(object gen) except NULL:
    return <bitgen_t*> PyCapsule_GetPointer(gen.bit_generator.capsule, "BitGenerator")


cdef inline double complex _conj(double complex z) nogil:
    return z.real - 1j * z.imag


cdef inline bint _bad(double complex z, double cap) nogil:
    cdef double m2 = z.real * z.real + z.imag * z.imag
    if not isfinite(m2):
        return True
    return m2 > cap * cap


cdef inline Py_ssize_t _refill(bitgen_t* bg, float* buf, Py_ssize_t block,
                               Py_ssize_t d, Py_ssize_t remaining_steps) nogil:
    cdef Py_ssize_t nb = block if block < remaining_steps else remaining_steps
    random_standard_normal_fill_f(bg, nb * d, buf)
    return nb


# ---------------------------------------------------------------------------
# Eliminated two-DOPO truncated Wigner
# ---------------------------------------------------------------------------

cdef cnp.int64_t _w2_path(bitgen_t* bg, double complex a1, double complex a2,
                          const double* es, Py_ssize_t S,
                          double xi, double g, double dt, double sx, double sp, double cs,
                          const cnp.int64_t* samp, Py_ssize_t T,
                          double complex* out, double cap,
                          float* buf, Py_ssize_t block, Py_ssize_t d) nogil:
    cdef double sq = sqrt(dt / 2.0)
    cdef double sxr = sqrt(sx), spr = sqrt(sp)
    cdef double gsxi = g * sqrt(xi)
    cdef double cxi = cs * xi
    cdef double c2s = -cs
    cdef double base = 1.0 - xi
    cdef bint with_c = xi > 0.0
    cdef Py_ssize_t i, ptr = 0, pos = 0, nb = 0
    cdef double e, m1, m2
    cdef double complex cw, n1, n2, d1, d2
    if ptr < T and samp[ptr] == 0:
        if _bad(a1, cap) or _bad(a2, cap):
            return 0
        out[2 * ptr] = a1
        out[2 * ptr + 1] = a2
        ptr += 1
    for i in range(S):
        if pos == nb * d:
            nb = _refill(bg, buf, block, d, S - i)
            pos = 0
        e = es[i]
        if with_c:
            cw = sq * (sxr * buf[pos + 4] + 1j * (spr * buf[pos + 5]))
        else:
            cw = 0
        m1 = a1.real * a1.real + a1.imag * a1.imag
        m2 = a2.real * a2.real + a2.imag * a2.imag
        n1 = g * sqrt(base + 2.0 * m1) * sq * (buf[pos] + 1j * (<double> buf[pos + 1])) + gsxi * cw
        n2 = g * sqrt(base + 2.0 * m2) * sq * (buf[pos + 2] + 1j * (<double> buf[pos + 3])) + (c2s * gsxi) * cw
        d1 = (-a1 + (e - a1 * a1) * _conj(a1) + cxi * a2) * dt + n1
        d2 = (-a2 + (e - a2 * a2) * _conj(a2) + cxi * a1) * dt + n2
        a1 = a1 + d1
        a2 = a2 + d2
        pos += d
        if ptr < T and samp[ptr] == i + 1:
            if _bad(a1, cap) or _bad(a2, cap):
                return i + 1
            out[2 * ptr] = a1
            out[2 * ptr + 1] = a2
            ptr += 1
    return -1


def run_wigner_two(object gens, double complex[:, ::1] a0, double[::1] e_steps,
                   double xi, double g, double dt, double sx, double sp, double coupling_sign,
                   cnp.int64_t[::1] sample_steps, double cap):
    cdef Py_ssize_t kk = a0.shape[0]
    cdef Py_ssize_t S = e_steps.shape[0]
    cdef Py_ssize_t T = sample_steps.shape[0]
    samples_np = np.full((kk, T, 2), np.nan, dtype=np.complex128)
    diverged_np = np.full(kk, -1, dtype=np.int64)
    cdef double complex[:, :, ::1] samples = samples_np
    cdef cnp.int64_t[::1] diverged = diverged_np
    cdef Py_ssize_t d = 6 if xi > 0.0 else 4
    cdef Py_ssize_t block = max(1, _BLOCK_FLOATS // d)
    buf_np = np.empty(block * d, dtype=np.float32)
    cdef float[::1] buf = buf_np
    cdef bitgen_t* bg
    cdef Py_ssize_t k
    for k in range(kk):
        bg = _bitgen(gens[k])
        with nogil:
            diverged[k] = _w2_path(bg, a0[k, 0], a0[k, 1], &e_steps[0], S,
                                   xi, g, dt, sx, sp, coupling_sign,
                                   &sample_steps[0], T, &samples[k, 0, 0], cap,
                                   &buf[0], block, d)
    return samples_np, diverged_np


# ---------------------------------------------------------------------------
# N-pulse ring, truncated Wigner
# ---------------------------------------------------------------------------

cdef cnp.int64_t _ring_path(bitgen_t* bg, double complex* a, Py_ssize_t n,
                            const double* es, Py_ssize_t S,
                            double xi, double g, double dt, double sx, double sp, double cs,
                            const cnp.int64_t* samp, Py_ssize_t T,
                            double complex* out, double cap,
                            float* buf, Py_ssize_t block, Py_ssize_t d,
                            double complex* inc, double complex* cw) nogil:
    cdef double sq = sqrt(dt / 2.0)
    cdef double sxr = sqrt(sx), spr = sqrt(sp)
    cdef double gsxi = g * sqrt(xi)
    cdef double cxi = cs * xi
    cdef double pair_sign = -cs
    cdef double base = 1.0 - 2.0 * xi
    cdef bint with_c = xi > 0.0
    cdef Py_ssize_t i, j, jm, jp, ptr = 0, pos = 0, nb = 0, q
    cdef double e, m
    cdef double complex aj, noise
    cdef bint bad
    if ptr < T and samp[ptr] == 0:
        for j in range(n):
            if _bad(a[j], cap):
                return 0
        for j in range(n):
            out[n * ptr + j] = a[j]
        ptr += 1
    for i in range(S):
        if pos == nb * d:
            nb = _refill(bg, buf, block, d, S - i)
            pos = 0
        e = es[i]
        if with_c:
            q = pos + 2 * n
            for j in range(n):
                cw[j] = sq * (sxr * buf[q + 2 * j] + 1j * (spr * buf[q + 2 * j + 1]))
        for j in range(n):
            aj = a[j]
            jm = j - 1 if j > 0 else n - 1
            jp = j + 1 if j < n - 1 else 0
            m = aj.real * aj.real + aj.imag * aj.imag
            noise = g * sqrt(base + 2.0 * m) * sq * (buf[pos + 2 * j] + 1j * (<double> buf[pos + 2 * j + 1]))
            if with_c:
                noise = noise + gsxi * (cw[jp] + pair_sign * cw[j])
            inc[j] = (-aj + (e - aj * aj) * _conj(aj) + cxi * (a[jm] + a[jp])) * dt + noise
        for j in range(n):
            a[j] = a[j] + inc[j]
        pos += d
        if ptr < T and samp[ptr] == i + 1:
            bad = False
            for j in range(n):
                if _bad(a[j], cap):
                    bad = True
                    break
            if bad:
                return i + 1
            for j in range(n):
                out[n * ptr + j] = a[j]
            ptr += 1
    return -1


def run_wigner_ring(object gens, double complex[:, ::1] a0, double[::1] e_steps,
                    double xi, double g, double dt, double sx, double sp, double coupling_sign,
                    cnp.int64_t[::1] sample_steps, double cap):
    cdef Py_ssize_t kk = a0.shape[0]
    cdef Py_ssize_t n = a0.shape[1]
    cdef Py_ssize_t S = e_steps.shape[0]
    cdef Py_ssize_t T = sample_steps.shape[0]
    samples_np = np.full((kk, T, n), np.nan, dtype=np.complex128)
    diverged_np = np.full(kk, -1, dtype=np.int64)
    cdef double complex[:, :, ::1] samples = samples_np
    cdef cnp.int64_t[::1] diverged = diverged_np
    cdef Py_ssize_t d = 4 * n if xi > 0.0 else 2 * n
    cdef Py_ssize_t block = max(1, _BLOCK_FLOATS // d)
    buf_np = np.empty(block * d, dtype=np.float32)
    state_np = np.empty(n, dtype=np.complex128)
    inc_np = np.empty(n, dtype=np.complex128)
    cw_np = np.empty(n, dtype=np.complex128)
    cdef float[::1] buf = buf_np
    cdef double complex[::1] state = state_np
    cdef double complex[::1] inc = inc_np
    cdef double complex[::1] cw = cw_np
    cdef bitgen_t* bg
    cdef Py_ssize_t k, j
    for k in range(kk):
        bg = _bitgen(gens[k])
        for j in range(n):
            state[j] = a0[k, j]
        with nogil:
            diverged[k] = _ring_path(bg, &state[0], n, &e_steps[0], S,
                                     xi, g, dt, sx, sp, coupling_sign,
                                     &sample_steps[0], T, &samples[k, 0, 0], cap,
                                     &buf[0], block, d, &inc[0], &cw[0])
    return samples_np, diverged_np


# ---------------------------------------------------------------------------
# Eliminated two-DOPO positive-P (doubled phase space)
# ---------------------------------------------------------------------------

cdef cnp.int64_t _pp2_path(bitgen_t* bg, double complex* y,
                           const double* es, Py_ssize_t S,
                           double xi, double g, double dt, double cs,
                           const cnp.int64_t* samp, Py_ssize_t T,
                           double complex* out, double cap,
                           float* buf, Py_ssize_t block) nogil:
    cdef double sqdt = sqrt(dt)
    cdef double cxi = cs * xi
    cdef Py_ssize_t i, ptr = 0, pos = 0, nb = 0, j
    cdef double e
    cdef double complex a1, b1, a2, b2, d0, d1, d2, d3
    cdef bint bad
    if ptr < T and samp[ptr] == 0:
        for j in range(4):
            if _bad(y[j], cap):
                return 0
        for j in range(4):
            out[4 * ptr + j] = y[j]
        ptr += 1
    for i in range(S):
        if pos == nb * 4:
            nb = _refill(bg, buf, block, 4, S - i)
            pos = 0
        e = es[i]
        a1 = y[0]; b1 = y[1]; a2 = y[2]; b2 = y[3]
        d0 = (-a1 + (e - a1 * a1) * b1 + cxi * a2) * dt + g * csqrt(e - a1 * a1) * (sqdt * buf[pos])
        d1 = (-b1 + (e - b1 * b1) * a1 + cxi * b2) * dt + g * csqrt(e - b1 * b1) * (sqdt * buf[pos + 1])
        d2 = (-a2 + (e - a2 * a2) * b2 + cxi * a1) * dt + g * csqrt(e - a2 * a2) * (sqdt * buf[pos + 2])
        d3 = (-b2 + (e - b2 * b2) * a2 + cxi * b1) * dt + g * csqrt(e - b2 * b2) * (sqdt * buf[pos + 3])
        y[0] = a1 + d0; y[1] = b1 + d1; y[2] = a2 + d2; y[3] = b2 + d3
        pos += 4
        if ptr < T and samp[ptr] == i + 1:
            bad = False
            for j in range(4):
                if _bad(y[j], cap):
                    bad = True
                    break
            if bad:
                return i + 1
            for j in range(4):
                out[4 * ptr + j] = y[j]
            ptr += 1
    return -1


def run_positive_p_two(object gens, double complex[:, ::1] a0, double[::1] e_steps,
                       double xi, double g, double dt, double coupling_sign,
                       cnp.int64_t[::1] sample_steps, double cap):
    cdef Py_ssize_t kk = a0.shape[0]
    cdef Py_ssize_t S = e_steps.shape[0]
    cdef Py_ssize_t T = sample_steps.shape[0]
    samples_np = np.full((kk, T, 4), np.nan, dtype=np.complex128)
    diverged_np = np.full(kk, -1, dtype=np.int64)
    cdef double complex[:, :, ::1] samples = samples_np
    cdef cnp.int64_t[::1] diverged = diverged_np
    cdef Py_ssize_t block = max(1, _BLOCK_FLOATS // 4)
    buf_np = np.empty(block * 4, dtype=np.float32)
    state_np = np.empty(4, dtype=np.complex128)
    cdef float[::1] buf = buf_np
    cdef double complex[::1] state = state_np
    cdef bitgen_t* bg
    cdef Py_ssize_t k, j
    for k in range(kk):
        bg = _bitgen(gens[k])
        for j in range(4):
            state[j] = a0[k, j]
        with nogil:
            diverged[k] = _pp2_path(bg, &state[0], &e_steps[0], S,
                                    xi, g, dt, coupling_sign,
                                    &sample_steps[0], T, &samples[k, 0, 0], cap,
                                    &buf[0], block)
    return samples_np, diverged_np


# ---------------------------------------------------------------------------
# Five-mode truncated Wigner (un-eliminated)
# ---------------------------------------------------------------------------

cdef cnp.int64_t _w5_path(bitgen_t* bg, double complex* y,
                          const double* eps_steps, Py_ssize_t S,
                          double gs, double gp, double gc, double kappa, double zeta,
                          double cs, double dt, double sx, double sp,
                          const cnp.int64_t* samp, Py_ssize_t T,
                          double complex* out, double cap,
                          float* buf, Py_ssize_t block) nogil:
    cdef double sq = sqrt(dt / 2.0)
    cdef double sxr = sqrt(sx), spr = sqrt(sp)
    cdef double rs = sqrt(gs), rp = sqrt(gp), rc = sqrt(gc)
    cdef Py_ssize_t i, ptr = 0, pos = 0, nb = 0, j
    cdef double eps
    cdef double complex s1, s2, p1, p2, c, d0, d1, d2, d3, d4
    cdef bint bad
    if ptr < T and samp[ptr] == 0:
        for j in range(5):
            if _bad(y[j], cap):
                return 0
        for j in range(5):
            out[5 * ptr + j] = y[j]
        ptr += 1
    for i in range(S):
        if pos == nb * 10:
            nb = _refill(bg, buf, block, 10, S - i)
            pos = 0
        eps = eps_steps[i]
        s1 = y[0]; s2 = y[1]; p1 = y[2]; p2 = y[3]; c = y[4]
        d0 = (-gs * s1 + kappa * p1 * _conj(s1) + zeta * c) * dt + rs * sq * (buf[pos] + 1j * (<double> buf[pos + 1]))
        d1 = (-gs * s2 + kappa * p2 * _conj(s2) - (zeta * cs) * c) * dt + rs * sq * (buf[pos + 2] + 1j * (<double> buf[pos + 3]))
        d2 = (-gp * p1 - 0.5 * kappa * s1 * s1 + eps) * dt + rp * sq * (buf[pos + 4] + 1j * (<double> buf[pos + 5]))
        d3 = (-gp * p2 - 0.5 * kappa * s2 * s2 + eps) * dt + rp * sq * (buf[pos + 6] + 1j * (<double> buf[pos + 7]))
        d4 = (-gc * c - zeta * s1 + (zeta * cs) * s2) * dt + rc * sq * (sxr * buf[pos + 8] + 1j * (spr * buf[pos + 9]))
        y[0] = s1 + d0; y[1] = s2 + d1; y[2] = p1 + d2; y[3] = p2 + d3; y[4] = c + d4
        pos += 10
        if ptr < T and samp[ptr] == i + 1:
            bad = False
            for j in range(5):
                if _bad(y[j], cap):
                    bad = True
                    break
            if bad:
                return i + 1
            for j in range(5):
                out[5 * ptr + j] = y[j]
            ptr += 1
    return -1


def run_wigner_five(object gens, double complex[:, ::1] a0, double[::1] eps_steps,
                    double gamma_s, double gamma_p, double gamma_c, double kappa, double zeta,
                    double coupling_sign, double dt, double sx, double sp,
                    cnp.int64_t[::1] sample_steps, double cap):
    cdef Py_ssize_t kk = a0.shape[0]
    cdef Py_ssize_t S = eps_steps.shape[0]
    cdef Py_ssize_t T = sample_steps.shape[0]
    samples_np = np.full((kk, T, 5), np.nan, dtype=np.complex128)
    diverged_np = np.full(kk, -1, dtype=np.int64)
    cdef double complex[:, :, ::1] samples = samples_np
    cdef cnp.int64_t[::1] diverged = diverged_np
    cdef Py_ssize_t block = max(1, _BLOCK_FLOATS // 10)
    buf_np = np.empty(block * 10, dtype=np.float32)
    state_np = np.empty(5, dtype=np.complex128)
    cdef float[::1] buf = buf_np
    cdef double complex[::1] state = state_np
    cdef bitgen_t* bg
    cdef Py_ssize_t k, j
    for k in range(kk):
        bg = _bitgen(gens[k])
        for j in range(5):
            state[j] = a0[k, j]
        with nogil:
            diverged[k] = _w5_path(bg, &state[0], &eps_steps[0], S,
                                   gamma_s, gamma_p, gamma_c, kappa, zeta,
                                   coupling_sign, dt, sx, sp,
                                   &sample_steps[0], T, &samples[k, 0, 0], cap,
                                   &buf[0], block)
    return samples_np, diverged_np


# ---------------------------------------------------------------------------
# Ten-variable positive-P (un-eliminated)
# ---------------------------------------------------------------------------

cdef cnp.int64_t _pp10_path(bitgen_t* bg, double complex* y,
                            const double* eps_steps, Py_ssize_t S,
                            double gs, double gp, double gc, double kappa, double zeta,
                            double cs, double dt,
                            const cnp.int64_t* samp, Py_ssize_t T,
                            double complex* out, double cap,
                            float* buf, Py_ssize_t block) nogil:
    cdef double sqdt = sqrt(dt)
    cdef Py_ssize_t i, ptr = 0, pos = 0, nb = 0, j
    cdef double eps
    cdef double complex as1, bs1, as2, bs2, ap1, bp1, ap2, bp2, ac, bc
    cdef double complex d0, d1, d2, d3
    cdef bint bad
    if ptr < T and samp[ptr] == 0:
        for j in range(10):
            if _bad(y[j], cap):
                return 0
        for j in range(10):
            out[10 * ptr + j] = y[j]
        ptr += 1
    for i in range(S):
        if pos == nb * 4:
            nb = _refill(bg, buf, block, 4, S - i)
            pos = 0
        eps = eps_steps[i]
        as1 = y[0]; bs1 = y[1]; as2 = y[2]; bs2 = y[3]
        ap1 = y[4]; bp1 = y[5]; ap2 = y[6]; bp2 = y[7]
        ac = y[8]; bc = y[9]
        d0 = (-gs * as1 + kappa * ap1 * bs1 + zeta * ac) * dt + csqrt(kappa * ap1) * (sqdt * buf[pos])
        d1 = (-gs * bs1 + kappa * bp1 * as1 + zeta * bc) * dt + csqrt(kappa * bp1) * (sqdt * buf[pos + 1])
        d2 = (-gs * as2 + kappa * ap2 * bs2 - (zeta * cs) * ac) * dt + csqrt(kappa * ap2) * (sqdt * buf[pos + 2])
        d3 = (-gs * bs2 + kappa * bp2 * as2 - (zeta * cs) * bc) * dt + csqrt(kappa * bp2) * (sqdt * buf[pos + 3])
        y[0] = as1 + d0; y[1] = bs1 + d1; y[2] = as2 + d2; y[3] = bs2 + d3
        y[4] = ap1 + (-gp * ap1 - 0.5 * kappa * as1 * as1 + eps) * dt
        y[5] = bp1 + (-gp * bp1 - 0.5 * kappa * bs1 * bs1 + eps) * dt
        y[6] = ap2 + (-gp * ap2 - 0.5 * kappa * as2 * as2 + eps) * dt
        y[7] = bp2 + (-gp * bp2 - 0.5 * kappa * bs2 * bs2 + eps) * dt
        y[8] = ac + (-gc * ac - zeta * as1 + (zeta * cs) * as2) * dt
        y[9] = bc + (-gc * bc - zeta * bs1 + (zeta * cs) * bs2) * dt
        pos += 4
        if ptr < T and samp[ptr] == i + 1:
            bad = False
            for j in range(10):
                if _bad(y[j], cap):
                    bad = True
                    break
            if bad:
                return i + 1
            for j in range(10):
                out[10 * ptr + j] = y[j]
            ptr += 1
    return -1


def run_positive_p_full(object gens, double complex[:, ::1] a0, double[::1] eps_steps,
                        double gamma_s, double gamma_p, double gamma_c, double kappa, double zeta,
                        double coupling_sign, double dt,
                        cnp.int64_t[::1] sample_steps, double cap):
    cdef Py_ssize_t kk = a0.shape[0]
    cdef Py_ssize_t S = eps_steps.shape[0]
    cdef Py_ssize_t T = sample_steps.shape[0]
    samples_np = np.full((kk, T, 10), np.nan, dtype=np.complex128)
    diverged_np = np.full(kk, -1, dtype=np.int64)
    cdef double complex[:, :, ::1] samples = samples_np
    cdef cnp.int64_t[::1] diverged = diverged_np
    cdef Py_ssize_t block = max(1, _BLOCK_FLOATS // 4)
    buf_np = np.empty(block * 4, dtype=np.float32)
    state_np = np.empty(10, dtype=np.complex128)
    cdef float[::1] buf = buf_np
    cdef double complex[::1] state = state_np
    cdef bitgen_t* bg
    cdef Py_ssize_t k, j
    for k in range(kk):
        bg = _bitgen(gens[k])
        for j in range(10):
            state[j] = a0[k, j]
        with nogil:
            diverged[k] = _pp10_path(bg, &state[0], &eps_steps[0], S,
                                     gamma_s, gamma_p, gamma_c, kappa, zeta,
                                     coupling_sign, dt,
                                     &sample_steps[0], T, &samples[k, 0, 0], cap,
                                     &buf[0], block)
    return samples_np, diverged_np


# ---------------------------------------------------------------------------
# Discrete round-trip machine
# ---------------------------------------------------------------------------

cdef cnp.int64_t _discrete_path(bitgen_t* bg, double complex* a, Py_ssize_t n,
                                double pump_e, double mu, double t_out, double t_inj,
                                Py_ssize_t m, bint inject_first,
                                double vx, double vp, const double* cpl,
                                Py_ssize_t rounds,
                                const cnp.int64_t* samp, Py_ssize_t T,
                                double complex* out, double* upair,
                                Py_ssize_t ui, Py_ssize_t uj, double usign, double cap,
                                float* buf, Py_ssize_t block, Py_ssize_t d,
                                double* ct) nogil:
    cdef double st = sqrt(t_out), sr = sqrt(1.0 - t_out)
    cdef double k_meas = sr / st
    cdef double sti = sqrt(1.0 - t_inj)
    cdef double svx = sqrt(vx), svp = sqrt(vp)
    cdef double dt = 1.0 / m
    cdef double sq = sqrt(dt / 2.0)
    cdef double gnoise = sqrt(2.0) * mu
    cdef Py_ssize_t t, j, l, ss, ptr = 0, pos = 0, nb = 0, q
    cdef double complex f, aj, dw
    cdef double fb
    cdef bint bad
    if ptr < T and samp[ptr] == 0:
        for j in range(n):
            if _bad(a[j], cap):
                return 0
        for j in range(n):
            out[n * ptr + j] = a[j]
        ptr += 1
    for t in range(rounds):
        if pos == nb * d:
            nb = _refill(bg, buf, block, d, rounds - t)
            pos = 0
        for j in range(n):
            f = mu * (svx * buf[pos + 2 * j] + 1j * (svp * buf[pos + 2 * j + 1]))
            ct[j] = a[j].real - k_meas * f.real
            a[j] = sr * a[j] + st * f
        if inject_first:
            for j in range(n):
                fb = 0.0
                for l in range(n):
                    fb += cpl[j * n + l] * ct[l]
                ct[j + n] = fb  # stash in upper half of scratch
            for j in range(n):
                a[j] = sti * a[j] + ct[j + n]
        q = pos + 2 * n
        for ss in range(m):
            for j in range(n):
                aj = a[j]
                dw = sq * (buf[q + 2 * j] + 1j * (<double> buf[q + 2 * j + 1]))
                a[j] = aj + (pump_e - aj * aj) * _conj(aj) * dt + gnoise * _conj(aj) * dw
            q += 2 * n
        if not inject_first:
            for j in range(n):
                fb = 0.0
                for l in range(n):
                    fb += cpl[j * n + l] * ct[l]
                ct[j + n] = fb
            for j in range(n):
                a[j] = sti * a[j] + ct[j + n]
        pos += d
        if upair != NULL:
            upair[t] = (a[ui].real + usign * a[uj].real) / mu
        if ptr < T and samp[ptr] == t + 1:
            bad = False
            for j in range(n):
                if _bad(a[j], cap):
                    bad = True
                    break
            if bad:
                return t + 1
            for j in range(n):
                out[n * ptr + j] = a[j]
            ptr += 1
    return -1


def run_discrete(object gens, double complex[:, ::1] a0,
                 double pump_e, double mu, double t_out, double t_inj,
                 int substeps, bint inject_before_gain,
                 double vx, double vp, double[:, ::1] coupling,
                 int rounds, cnp.int64_t[::1] sample_rounds,
                 int upair_i, int upair_j, double upair_sign, double cap):
    cdef Py_ssize_t kk = a0.shape[0]
    cdef Py_ssize_t n = a0.shape[1]
    cdef Py_ssize_t T = sample_rounds.shape[0]
    samples_np = np.full((kk, T, n), np.nan, dtype=np.complex128)
    diverged_np = np.full(kk, -1, dtype=np.int64)
    cdef double complex[:, :, ::1] samples = samples_np
    cdef cnp.int64_t[::1] diverged = diverged_np
    cdef bint want_upair = upair_i >= 0
    upair_np = np.full((kk, rounds), np.nan) if want_upair else None
    cdef double[:, ::1] upair_mv = upair_np if want_upair else np.empty((1, 1))
    cdef Py_ssize_t d = 2 * n + 2 * n * substeps
    cdef Py_ssize_t block = max(1, _BLOCK_FLOATS // d)
    buf_np = np.empty(block * d, dtype=np.float32)
    state_np = np.empty(n, dtype=np.complex128)
    ct_np = np.empty(2 * n, dtype=np.float64)
    cdef float[::1] buf = buf_np
    cdef double complex[::1] state = state_np
    cdef double[::1] ct = ct_np
    cdef bitgen_t* bg
    cdef double* upair_ptr
    cdef Py_ssize_t k, j
    for k in range(kk):
        bg = _bitgen(gens[k])
        for j in range(n):
            state[j] = a0[k, j]
        if want_upair:
            upair_ptr = &upair_mv[k, 0]
        else:
            upair_ptr = NULL
        with nogil:
            diverged[k] = _discrete_path(bg, &state[0], n, pump_e, mu, t_out, t_inj,
                                         substeps, inject_before_gain, vx, vp,
                                         &coupling[0, 0], rounds,
                                         &sample_rounds[0], T, &samples[k, 0, 0],
                                         upair_ptr, upair_i, upair_j, upair_sign, cap,
                                         &buf[0], block, d, &ct[0])
    return samples_np, upair_np, diverged_np
