# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: particle interaction sweep and nonlocal sources.

Mirrors _kernels_py operation for operation. The particle pass pulls
raw doubles straight from the generator's bit stream (one Fisher-Yates
shuffle, then two uniforms per in-range pair) in the same order as the
NumPy fallback, so both backends produce bit-identical trajectories.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport fabs
from numpy.random cimport bitgen_t

cdef double COINCIDENCE_EPS = 1e-12

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_bitgen_from(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("rng does not expose a BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


def interaction_pass_1d(
    double[::1] x,
    double[::1] v,
    double[::1] lam,
    double alpha,
    double beta,
    double gamma,
    double rate_mu,
    double rate_eta,
    double dt,
    double nu,
    double delta,
    bint binary_rule,
    double R,
    object rng,
):
    """One stochastic pairwise interaction sweep; updates v and lam in place.

    Returns (coincident_pairs, clamped_values).
    """
    cdef Py_ssize_t n = x.shape[0]
    if n < 2:
        return 0, 0
    cdef bitgen_t *bg = _bitgen_from(rng)

    perm_np = np.arange(n, dtype=np.int64)
    cdef long long[::1] perm = perm_np
    cdef Py_ssize_t ip, jp
    cdef long long tswap
    cdef double ud
    for ip in range(n - 1, 0, -1):
        ud = bg.next_double(bg.state)
        jp = <Py_ssize_t> (ud * (ip + 1))
        if jp > ip:  # guard against the product rounding up to i+1
            jp = ip
        tswap = perm[ip]
        perm[ip] = perm[jp]
        perm[jp] = tswap

    cdef double p_theta = rate_mu * dt
    cdef double p_sigma = rate_eta * dt
    cdef Py_ssize_t npairs = n // 2
    cdef Py_ssize_t p, i, j
    cdef double dxy, u1d, u2d, rep, ki, kj, vi, vj, li, lj, lin, ljn
    cdef long n_coincident = 0
    cdef long n_clamped = 0

    for p in range(npairs):
        i = <Py_ssize_t> perm[2 * p]
        j = <Py_ssize_t> perm[2 * p + 1]
        dxy = x[i] - x[j]
        if fabs(dxy) > R:
            continue
        u1d = bg.next_double(bg.state)
        u2d = bg.next_double(bg.state)
        if u1d < p_theta:
            vi = v[i]
            vj = v[j]
            li = lam[i]
            lj = lam[j]
            if fabs(dxy) < COINCIDENCE_EPS:
                rep = 0.0
                n_coincident += 1
            else:
                rep = alpha / dxy
            ki = rep + (1.0 - li) * (beta * (vj - vi) + gamma * (x[j] - x[i]))
            kj = -rep + (1.0 - lj) * (beta * (vi - vj) + gamma * (x[i] - x[j]))
            v[i] = vi + ki
            v[j] = vj + kj
        if u2d < p_sigma:
            li = lam[i]
            lj = lam[j]
            if binary_rule:
                lam[i] = 1.0 - li
                lam[j] = 1.0 - lj
            else:
                lin = li + nu * (lj - li) + delta * (1.0 - 2.0 * li + nu * (li - lj))
                ljn = lj + nu * (li - lj) + delta * (1.0 - 2.0 * lj + nu * (lj - li))
                if lin < 0.0:
                    lin = 0.0
                    n_clamped += 1
                elif lin > 1.0:
                    lin = 1.0
                    n_clamped += 1
                if ljn < 0.0:
                    ljn = 0.0
                    n_clamped += 1
                elif ljn > 1.0:
                    ljn = 1.0
                    n_clamped += 1
                lam[i] = lin
                lam[j] = ljn

    return int(n_coincident), int(n_clamped)


def sources_1d(
    double[::1] rho,
    double[::1] u1,
    double[::1] l,
    double dx,
    int kmax,
    double alpha0,
    double beta0,
    double gamma0,
    double nu,
    double mu,
    double eta,
):
    """Nonlocal velocity and leadership sources on a 1D grid.

    Same moment decomposition as the NumPy fallback: windowed sums carry
    the alignment and leadership terms, short FIR taps (1/k and k) carry
    repulsion and attraction, so the sweep stays linear in cell count.
    """
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t K = kmax
    cdef Py_ssize_t w = 2 * K + 1

    pad_np = np.zeros(n + 2 * K)
    pad_rl_np = np.zeros(n + 2 * K)
    pad_ru_np = np.zeros(n + 2 * K)
    pad_rlu_np = np.zeros(n + 2 * K)
    cdef double[::1] pad = pad_np
    cdef double[::1] pad_rl = pad_rl_np
    cdef double[::1] pad_ru = pad_ru_np
    cdef double[::1] pad_rlu = pad_rlu_np
    cdef Py_ssize_t i
    cdef double rl
    for i in range(n):
        pad[K + i] = rho[i]
        rl = rho[i] * l[i]
        pad_rl[K + i] = rl
        pad_ru[K + i] = rho[i] * u1[i]
        pad_rlu[K + i] = rl * u1[i]

    invk_np = np.zeros(w)
    kk_np = np.zeros(w)
    cdef double[::1] invk = invk_np
    cdef double[::1] kk = kk_np
    cdef long k
    for k in range(-<long>K, <long>K + 1):
        if k != 0:
            invk[k + K] = 1.0 / k
        kk[k + K] = <double> k

    gu_np = np.zeros(n)
    gl_np = np.zeros(n)
    cdef double[::1] gu = gu_np
    cdef double[::1] gl = gl_np

    cdef double s_rho = 0.0
    cdef double s_rl = 0.0
    cdef double s_ru = 0.0
    cdef double s_rlu = 0.0
    for i in range(w):
        s_rho = s_rho + pad[i]
        s_rl = s_rl + pad_rl[i]
        s_ru = s_ru + pad_ru[i]
        s_rlu = s_rlu + pad_rlu[i]

    cdef double cal = 0.5 * beta0 * dx
    cdef double catt = gamma0 * dx * dx
    cdef double edx = eta * dx
    cdef double rep, att, al, cl, val
    for i in range(n):
        rep = 0.0
        att = 0.0
        for k in range(-<long>K, <long>K + 1):
            if k == 0:
                continue
            val = pad[i + K + k]
            rep += val * invk[k + K]
            att += val * kk[k + K]
        al = s_rlu - l[i] * s_ru - u1[i] * s_rl + l[i] * u1[i] * s_rho
        gu[i] = mu * (cal * al - alpha0 * rep + catt * (1.0 - l[i]) * att)
        cl = 1.0 - 2.0 * l[i] + nu * l[i]
        gl[i] = edx * (cl * s_rho - nu * s_rl)
        if i + 1 < n:
            s_rho = s_rho + pad[i + w]
            s_rho = s_rho - pad[i]
            s_rl = s_rl + pad_rl[i + w]
            s_rl = s_rl - pad_rl[i]
            s_ru = s_ru + pad_ru[i + w]
            s_ru = s_ru - pad_ru[i]
            s_rlu = s_rlu + pad_rlu[i + w]
            s_rlu = s_rlu - pad_rlu[i]
    return gu_np, gl_np


def sources_2d(
    double[:, ::1] rho,
    double[:, ::1] u1,
    double[:, ::1] u2,
    double[:, ::1] l,
    double dx1,
    double dx2,
    long long[:, ::1] offsets,
    double alpha0,
    double beta0,
    double gamma0,
    double nu,
    double mu,
    double eta,
):
    """Nonlocal sources on a 2D grid over a precomputed disk stencil."""
    cdef Py_ssize_t n1 = rho.shape[0]
    cdef Py_ssize_t n2 = rho.shape[1]
    cdef Py_ssize_t m = offsets.shape[0]
    cdef double area = dx1 * dx2

    ox_np = np.empty(m)
    oy_np = np.empty(m)
    g1_np = np.empty(m)
    g2_np = np.empty(m)
    cdef double[::1] ox = ox_np
    cdef double[::1] oy = oy_np
    cdef double[::1] g1 = g1_np
    cdef double[::1] g2 = g2_np
    cdef Py_ssize_t t
    cdef long long a, b
    cdef double inv_d2
    for t in range(m):
        a = offsets[t, 0]
        b = offsets[t, 1]
        ox[t] = a * dx1
        oy[t] = b * dx2
        if a != 0 or b != 0:
            inv_d2 = 1.0 / (ox[t] * ox[t] + oy[t] * oy[t])
            g1[t] = ox[t] * inv_d2
            g2[t] = oy[t] * inv_d2
        else:
            g1[t] = 0.0
            g2[t] = 0.0

    gu1_np = np.zeros((n1, n2))
    gu2_np = np.zeros((n1, n2))
    gl_np = np.zeros((n1, n2))
    cdef double[:, ::1] gu1 = gu1_np
    cdef double[:, ::1] gu2 = gu2_np
    cdef double[:, ::1] gl = gl_np

    cdef Py_ssize_t i, j, r, s
    cdef double w, li, u1i, u2i
    cdef double s_al1, s_al2, s_rep1, s_rep2, s_att1, s_att2, s_l
    for i in range(n1):
        for j in range(n2):
            li = l[i, j]
            u1i = u1[i, j]
            u2i = u2[i, j]
            s_al1 = 0.0
            s_al2 = 0.0
            s_rep1 = 0.0
            s_rep2 = 0.0
            s_att1 = 0.0
            s_att2 = 0.0
            s_l = 0.0
            for t in range(m):
                r = i + <Py_ssize_t> offsets[t, 0]
                s = j + <Py_ssize_t> offsets[t, 1]
                if r < 0 or r >= n1 or s < 0 or s >= n2:
                    continue
                w = area * rho[r, s]
                s_al1 += w * (l[r, s] - li) * (u1[r, s] - u1i)
                s_al2 += w * (l[r, s] - li) * (u2[r, s] - u2i)
                s_rep1 += w * g1[t]
                s_rep2 += w * g2[t]
                s_att1 += w * ox[t]
                s_att2 += w * oy[t]
                s_l += w * (1.0 - 2.0 * li + nu * (li - l[r, s]))
            gu1[i, j] = mu * (0.5 * beta0 * s_al1 - alpha0 * s_rep1 + gamma0 * (1.0 - li) * s_att1)
            gu2[i, j] = mu * (0.5 * beta0 * s_al2 - alpha0 * s_rep2 + gamma0 * (1.0 - li) * s_att2)
            gl[i, j] = eta * s_l
    return gu1_np, gu2_np, gl_np
