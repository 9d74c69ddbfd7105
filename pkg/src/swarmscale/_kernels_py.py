"""Pure NumPy reference kernels (fallback when the compiled core is absent).

Every function here mirrors its compiled counterpart operation for
operation: the particle pass consumes the PCG64 stream in exactly the
same order (one Fisher-Yates shuffle, then two uniforms per in-range
pair), and arithmetic expressions use the same association, so results
are bit-identical across backends.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

__all__ = ["interaction_pass_1d", "sources_1d", "sources_2d"]

COINCIDENCE_EPS = 1e-12


def _shuffled_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    """Fisher-Yates shuffle driven by raw uniforms (backend-portable).

    Consumes exactly n-1 doubles: j = floor(u * (i+1)) for i = n-1 .. 1.
    """
    perm = list(range(n))
    if n < 2:
        return np.asarray(perm, dtype=np.int64)
    us = rng.random(n - 1)
    t = 0
    for i in range(n - 1, 0, -1):
        j = int(us[t] * (i + 1))
        if j > i:  # guard against the product rounding up to i+1
            j = i
        perm[i], perm[j] = perm[j], perm[i]
        t += 1
    return np.asarray(perm, dtype=np.int64)


def interaction_pass_1d(
    x: np.ndarray,
    v: np.ndarray,
    lam: np.ndarray,
    alpha: float,
    beta: float,
    gamma: float,
    rate_mu: float,
    rate_eta: float,
    dt: float,
    nu: float,
    delta: float,
    binary_rule: bool,
    R: float,
    rng: np.random.Generator,
) -> Tuple[int, int]:
    """One stochastic pairwise interaction sweep; updates v and lam in place.

    Particles are shuffled into floor(n/2) disjoint pairs; for each pair
    within kernel range two independent Bernoulli draws gate the velocity
    and leadership updates. Both members update from pre-update values.
    Returns (coincident_pairs, clamped_values).
    """
    n = x.shape[0]
    if n < 2:
        return 0, 0
    perm = _shuffled_indices(n, rng)
    npairs = n // 2
    ii = perm[0 : 2 * npairs : 2]
    jj = perm[1 : 2 * npairs : 2]
    d = x[ii] - x[jj]
    in_range = np.abs(d) <= R
    m = int(np.count_nonzero(in_range))
    if m == 0:
        return 0, 0
    draws = rng.random(2 * m)
    utheta = draws[0::2]
    usigma = draws[1::2]
    ii = ii[in_range]
    jj = jj[in_range]
    d = d[in_range]
    p_theta = rate_mu * dt
    p_sigma = rate_eta * dt

    n_coincident = 0
    n_clamped = 0

    acc_v = utheta < p_theta
    if np.any(acc_v):
        iv = ii[acc_v]
        jv = jj[acc_v]
        dv = d[acc_v]
        coinc = np.abs(dv) < COINCIDENCE_EPS
        n_coincident = int(np.count_nonzero(coinc))
        safe = np.where(coinc, 1.0, dv)
        rep = np.where(coinc, 0.0, alpha / safe)
        xi = x[iv]
        xj = x[jv]
        vi = v[iv]
        vj = v[jv]
        li = lam[iv]
        lj = lam[jv]
        ki = rep + (1.0 - li) * (beta * (vj - vi) + gamma * (xj - xi))
        kj = -rep + (1.0 - lj) * (beta * (vi - vj) + gamma * (xi - xj))
        v[iv] = vi + ki
        v[jv] = vj + kj

    acc_l = usigma < p_sigma
    if np.any(acc_l):
        il = ii[acc_l]
        jl = jj[acc_l]
        li = lam[il]
        lj = lam[jl]
        if binary_rule:
            lam[il] = 1.0 - li
            lam[jl] = 1.0 - lj
        else:
            li_new = li + nu * (lj - li) + delta * (1.0 - 2.0 * li + nu * (li - lj))
            lj_new = lj + nu * (li - lj) + delta * (1.0 - 2.0 * lj + nu * (lj - li))
            low_i = li_new < 0.0
            high_i = li_new > 1.0
            low_j = lj_new < 0.0
            high_j = lj_new > 1.0
            n_clamped = int(
                np.count_nonzero(low_i)
                + np.count_nonzero(high_i)
                + np.count_nonzero(low_j)
                + np.count_nonzero(high_j)
            )
            lam[il] = np.clip(li_new, 0.0, 1.0)
            lam[jl] = np.clip(lj_new, 0.0, 1.0)

    return n_coincident, n_clamped


def sources_1d(
    rho: np.ndarray,
    u1: np.ndarray,
    l: np.ndarray,
    dx: float,
    kmax: int,
    alpha0: float,
    beta0: float,
    gamma0: float,
    nu: float,
    mu: float,
    eta: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Nonlocal velocity and leadership sources on a 1D grid.

    Quadrature over the closed stencil |k| <= kmax with full-cell weight;
    out-of-domain cells contribute zero density; the self cell is skipped
    in the repulsion term only (principal value), kept everywhere else.

    The pair products expand into windowed moment sums, which keeps the
    cost linear in the cell count:
      alignment = S[rho*l*u] - l*S[rho*u] - u*S[rho*l] + l*u*S[rho]
      leadership = (1 - 2l + nu*l)*S[rho] - nu*S[rho*l]
    The singular repulsion and linear attraction stay short FIR filters
    (taps 1/k and k). The dx factors cancel out of the repulsion taps.
    """
    n = rho.shape[0]
    K = kmax
    pad = np.zeros(n + 2 * K)
    pad_rl = np.zeros(n + 2 * K)
    pad_ru = np.zeros(n + 2 * K)
    pad_rlu = np.zeros(n + 2 * K)
    pad[K : K + n] = rho
    rl = rho * l
    ru = rho * u1
    pad_rl[K : K + n] = rl
    pad_ru[K : K + n] = ru
    pad_rlu[K : K + n] = rl * u1

    def window(p: np.ndarray) -> np.ndarray:
        cs = np.concatenate([[0.0], np.cumsum(p)])
        return cs[2 * K + 1 :] - cs[:n]

    s_rho = window(pad)
    s_rl = window(pad_rl)
    s_ru = window(pad_ru)
    s_rlu = window(pad_rlu)

    rep = np.zeros(n)
    att = np.zeros(n)
    for k in range(-K, K + 1):
        if k == 0:
            continue
        seg = pad[k + K : k + K + n]
        rep += seg * (1.0 / k)
        att += seg * float(k)

    al = s_rlu - l * s_ru - u1 * s_rl + l * u1 * s_rho
    cal = 0.5 * beta0 * dx
    catt = gamma0 * dx * dx
    gu = mu * (cal * al - alpha0 * rep + catt * (1.0 - l) * att)
    cl = 1.0 - 2.0 * l + nu * l
    gl = (eta * dx) * (cl * s_rho - nu * s_rl)
    return gu, gl


def sources_2d(
    rho: np.ndarray,
    u1: np.ndarray,
    u2: np.ndarray,
    l: np.ndarray,
    dx1: float,
    dx2: float,
    offsets: np.ndarray,
    alpha0: float,
    beta0: float,
    gamma0: float,
    nu: float,
    mu: float,
    eta: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonlocal sources on a 2D grid over a precomputed disk stencil."""
    n1, n2 = rho.shape
    area = dx1 * dx2
    s_al1 = np.zeros((n1, n2))
    s_al2 = np.zeros((n1, n2))
    s_rep1 = np.zeros((n1, n2))
    s_rep2 = np.zeros((n1, n2))
    s_att1 = np.zeros((n1, n2))
    s_att2 = np.zeros((n1, n2))
    s_l = np.zeros((n1, n2))
    for a, b in offsets:
        a = int(a)
        b = int(b)
        i0 = max(0, -a)
        i1 = min(n1, n1 - a)
        j0 = max(0, -b)
        j1 = min(n2, n2 - b)
        if i1 <= i0 or j1 <= j0:
            continue
        tgt = (slice(i0, i1), slice(j0, j1))
        src = (slice(i0 + a, i1 + a), slice(j0 + b, j1 + b))
        ox = a * dx1
        oy = b * dx2
        w = area * rho[src]
        s_al1[tgt] += w * (l[src] - l[tgt]) * (u1[src] - u1[tgt])
        s_al2[tgt] += w * (l[src] - l[tgt]) * (u2[src] - u2[tgt])
        if a != 0 or b != 0:
            inv_d2 = 1.0 / (ox * ox + oy * oy)
            s_rep1[tgt] += w * (ox * inv_d2)
            s_rep2[tgt] += w * (oy * inv_d2)
        s_att1[tgt] += w * ox
        s_att2[tgt] += w * oy
        s_l[tgt] += w * (1.0 - 2.0 * l[tgt] + nu * (l[tgt] - l[src]))
    gu1 = mu * (0.5 * beta0 * s_al1 - alpha0 * s_rep1 + gamma0 * (1.0 - l) * s_att1)
    gu2 = mu * (0.5 * beta0 * s_al2 - alpha0 * s_rep2 + gamma0 * (1.0 - l) * s_att2)
    gl = eta * s_l
    return gu1, gu2, gl
