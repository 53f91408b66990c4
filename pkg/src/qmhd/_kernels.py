"""Compiled stencil kernels.

Layout: arrays are ``(n1, n2)`` with the first index along ``r``/``x``.
Face arrays along direction 1 are ``(n1-1, n2)`` (face ``i`` sits between
nodes ``i`` and ``i+1``); along direction 2 they are ``(n1, n2-1)``.
Cylindrical metric enters only through ``rf`` (face radii), ``rn`` (node
radii), the radial control-volume widths ``vol1`` and the wall radii; for
the planar cavity these are all plain lengths.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def ddx1(f, h):
    n1, n2 = f.shape
    out = np.empty_like(f)
    inv = 0.5 / h
    for j in range(n2):
        out[0, j] = (-3.0 * f[0, j] + 4.0 * f[1, j] - f[2, j]) * inv
        out[n1 - 1, j] = (3.0 * f[n1 - 1, j] - 4.0 * f[n1 - 2, j] + f[n1 - 3, j]) * inv
    for i in range(1, n1 - 1):
        for j in range(n2):
            out[i, j] = (f[i + 1, j] - f[i - 1, j]) * inv
    return out


@njit(cache=True)
def ddx2(f, h):
    n1, n2 = f.shape
    out = np.empty_like(f)
    inv = 0.5 / h
    for i in range(n1):
        out[i, 0] = (-3.0 * f[i, 0] + 4.0 * f[i, 1] - f[i, 2]) * inv
        out[i, n2 - 1] = (3.0 * f[i, n2 - 1] - 4.0 * f[i, n2 - 2] + f[i, n2 - 3]) * inv
        for j in range(1, n2 - 1):
            out[i, j] = (f[i, j + 1] - f[i, j - 1]) * inv
    return out


@njit(cache=True)
def convective(u1, u2, T, h1, h2, k1, k2, gr):
    """Stationary momentum residual without pressure: ``(u.grad)u + Ha^2 u_perp - Gr T e2``."""
    d1u1 = ddx1(u1, h1)
    d2u1 = ddx2(u1, h2)
    d1u2 = ddx1(u2, h1)
    d2u2 = ddx2(u2, h2)
    c1 = u1 * d1u1 + u2 * d2u1 + k1 * u1
    c2 = u1 * d1u2 + u2 * d2u2 + k2 * u2 - gr * T
    return c1, c2


@njit(cache=True)
def fv_div(F1, F2, W1lo, W1hi, W2lo, W2hi, rf, vol1, vol2, r_lo, r_hi):
    """Control-volume divergence at every node from face and wall fluxes."""
    n1 = F2.shape[0]
    n2 = F1.shape[1]
    out = np.empty((n1, n2))
    for i in range(n1):
        for j in range(n2):
            if i == 0:
                e1 = rf[0] * F1[0, j] - r_lo * W1lo[j]
            elif i == n1 - 1:
                e1 = r_hi * W1hi[j] - rf[n1 - 2] * F1[n1 - 2, j]
            else:
                e1 = rf[i] * F1[i, j] - rf[i - 1] * F1[i - 1, j]
            if j == 0:
                e2 = F2[i, 0] - W2lo[i]
            elif j == n2 - 1:
                e2 = W2hi[i] - F2[i, n2 - 2]
            else:
                e2 = F2[i, j] - F2[i, j - 1]
            out[i, j] = e1 / vol1[i] + e2 / vol2[j]
    return out


@njit(cache=True)
def poisson_rhs(u1, u2, c1, c2, inv_tau, rf, vol1, vol2, r_lo, r_hi):
    """Divergence of ``u/tau - C`` with face averages and wall values from boundary nodes."""
    n1, n2 = u1.shape
    F1 = np.empty((n1 - 1, n2))
    F2 = np.empty((n1, n2 - 1))
    for i in range(n1 - 1):
        for j in range(n2):
            F1[i, j] = 0.5 * ((u1[i, j] + u1[i + 1, j]) * inv_tau - c1[i, j] - c1[i + 1, j])
    for i in range(n1):
        for j in range(n2 - 1):
            F2[i, j] = 0.5 * ((u2[i, j] + u2[i, j + 1]) * inv_tau - c2[i, j] - c2[i, j + 1])
    W1lo = u1[0, :] * inv_tau - c1[0, :]
    W1hi = u1[n1 - 1, :] * inv_tau - c1[n1 - 1, :]
    W2lo = u2[:, 0] * inv_tau - c2[:, 0]
    W2hi = u2[:, n2 - 1] * inv_tau - c2[:, n2 - 1]
    return fv_div(F1, F2, W1lo, W1hi, W2lo, W2hi, rf, vol1, vol2, r_lo, r_hi)


@njit(cache=True)
def fv_laplacian(p, g1lo, g1hi, g2lo, g2hi, h1, h2, rf, vol1, vol2, r_lo, r_hi):
    n1, n2 = p.shape
    F1 = np.empty((n1 - 1, n2))
    F2 = np.empty((n1, n2 - 1))
    for i in range(n1 - 1):
        for j in range(n2):
            F1[i, j] = (p[i + 1, j] - p[i, j]) / h1
    for i in range(n1):
        for j in range(n2 - 1):
            F2[i, j] = (p[i, j + 1] - p[i, j]) / h2
    return fv_div(F1, F2, g1lo, g1hi, g2lo, g2hi, rf, vol1, vol2, r_lo, r_hi)


@njit(cache=True)
def sor_sweeps(p, b, cE, cW, cN, cS, omega, nsweeps):
    """Red-black SOR on ``sum_nb a_nb (p_nb - p) = b``."""
    n1, n2 = p.shape
    for _ in range(nsweeps):
        for color in range(2):
            for i in range(n1):
                ce = cE[i]
                cw = cW[i]
                for j in range((i + color) % 2, n2, 2):
                    s = 0.0
                    if i < n1 - 1:
                        s += ce * p[i + 1, j]
                    if i > 0:
                        s += cw * p[i - 1, j]
                    if j < n2 - 1:
                        s += cN[j] * p[i, j + 1]
                    if j > 0:
                        s += cS[j] * p[i, j - 1]
                    diag = ce + cw + cN[j] + cS[j]
                    p[i, j] += omega * ((s - b[i, j]) / diag - p[i, j])


@njit(cache=True)
def operator_residual(p, b, cE, cW, cN, cS):
    """Max-norm of ``sum_nb a_nb (p_nb - p) - b``."""
    n1, n2 = p.shape
    rmax = 0.0
    for i in range(n1):
        for j in range(n2):
            s = -b[i, j]
            if i < n1 - 1:
                s += cE[i] * (p[i + 1, j] - p[i, j])
            if i > 0:
                s += cW[i] * (p[i - 1, j] - p[i, j])
            if j < n2 - 1:
                s += cN[j] * (p[i, j + 1] - p[i, j])
            if j > 0:
                s += cS[j] * (p[i, j - 1] - p[i, j])
            s = abs(s)
            if s > rmax:
                rmax = s
    return rmax


@njit(cache=True)
def tendencies(u1, u2, p, T, w1, w2, h1, h2, rn, rf, vol1, cyl, tau, k1, k2, gr, inv_pr,
               surface_flux, shear):
    """Time derivatives of u1, u2, T at interior nodes (other boundary entries are zero).

    Face values are arithmetic means of node values; normal derivatives at a
    face are compact two-point differences and tangential ones are means of
    the node derivatives. The face value of ``w`` carries the compact
    pressure gradient so that the flux of ``u - w`` matches the pressure
    equation.

    With ``surface_flux`` the tangential velocity on the free surface also
    gets a tendency, from the half control volume whose wall flux is the
    thermocapillary stress ``-shear * dT/ds``.
    """
    n1, n2 = u1.shape
    d2u1 = ddx2(u1, h2)
    d1u2 = ddx1(u2, h1)
    d1p = ddx1(p, h1)
    d2p = ddx2(p, h2)

    # fluxes through faces normal to direction 1
    A = np.empty((n1 - 1, n2))
    B = np.empty((n1 - 1, n2))
    F = np.empty((n1 - 1, n2))
    for i in range(n1 - 1):
        for j in range(n2):
            a = 0.5 * (u1[i, j] + u1[i + 1, j])
            b = 0.5 * (u2[i, j] + u2[i + 1, j])
            t = 0.5 * (T[i, j] + T[i + 1, j])
            wa = 0.5 * (w1[i, j] + w1[i + 1, j]) + tau * (
                (p[i + 1, j] - p[i, j]) / h1 - 0.5 * (d1p[i, j] + d1p[i + 1, j]))
            wb = 0.5 * (w2[i, j] + w2[i + 1, j])
            s11 = 2.0 * (u1[i + 1, j] - u1[i, j]) / h1
            s12 = 0.5 * (d2u1[i, j] + d2u1[i + 1, j]) + (u2[i + 1, j] - u2[i, j]) / h1
            A[i, j] = a * a - s11 - 2.0 * wa * a
            B[i, j] = a * b - s12 - (wa * b + a * wb)
            F[i, j] = (a - wa) * t - inv_pr * (T[i + 1, j] - T[i, j]) / h1

    # fluxes through faces normal to direction 2
    C = np.empty((n1, n2 - 1))
    D = np.empty((n1, n2 - 1))
    G = np.empty((n1, n2 - 1))
    for i in range(n1):
        for j in range(n2 - 1):
            a = 0.5 * (u1[i, j] + u1[i, j + 1])
            b = 0.5 * (u2[i, j] + u2[i, j + 1])
            t = 0.5 * (T[i, j] + T[i, j + 1])
            wa = 0.5 * (w1[i, j] + w1[i, j + 1])
            wb = 0.5 * (w2[i, j] + w2[i, j + 1]) + tau * (
                (p[i, j + 1] - p[i, j]) / h2 - 0.5 * (d2p[i, j] + d2p[i, j + 1]))
            s22 = 2.0 * (u2[i, j + 1] - u2[i, j]) / h2
            s12 = (u1[i, j + 1] - u1[i, j]) / h2 + 0.5 * (d1u2[i, j] + d1u2[i, j + 1])
            C[i, j] = b * a - s12 - (a * wb + b * wa)
            D[i, j] = b * b - s22 - 2.0 * wb * b
            G[i, j] = (b - wb) * t - inv_pr * (T[i, j + 1] - T[i, j]) / h2

    du1 = np.zeros((n1, n2))
    du2 = np.zeros((n1, n2))
    dT = np.zeros((n1, n2))
    for i in range(1, n1 - 1):
        v = vol1[i]
        re = rf[i]
        rw = rf[i - 1]
        for j in range(1, n2 - 1):
            div_a = (re * A[i, j] - rw * A[i - 1, j]) / v + (C[i, j] - C[i, j - 1]) / h2
            div_b = (re * B[i, j] - rw * B[i - 1, j]) / v + (D[i, j] - D[i, j - 1]) / h2
            div_t = (re * F[i, j] - rw * F[i - 1, j]) / v + (G[i, j] - G[i, j - 1]) / h2
            s1 = -div_a - d1p[i, j] - k1 * (u1[i, j] - w1[i, j])
            if cyl:
                s1 -= 2.0 * u1[i, j] / (rn[i] * rn[i])
            du1[i, j] = s1
            du2[i, j] = -div_b - d2p[i, j] - k2 * (u2[i, j] - w2[i, j]) + gr * T[i, j]
            dT[i, j] = -div_t

    if surface_flux:
        if cyl:
            N = n1 - 1
            v = vol1[N]
            for j in range(1, n2 - 1):
                stress = -shear * (T[N, j + 1] - T[N, j - 1]) / (2.0 * h2)
                div_b = (-stress - rf[N - 1] * B[N - 1, j]) / v + (D[N, j] - D[N, j - 1]) / h2
                du2[N, j] = -div_b - d2p[N, j] - k2 * (u2[N, j] - w2[N, j]) + gr * T[N, j]
        else:
            N = n2 - 1
            for i in range(1, n1 - 1):
                stress = -shear * (T[i + 1, N] - T[i - 1, N]) / (2.0 * h1)
                div_a = (A[i, N] - A[i - 1, N]) / vol1[i] + (-stress - C[i, N - 1]) / (0.5 * h2)
                du1[i, N] = -div_a - d1p[i, N] - k1 * (u1[i, N] - w1[i, N])
    return du1, du2, dT


@njit(cache=True)
def temperature_bc(T, cyl, x2):
    n1, n2 = T.shape
    if cyl:
        for j in range(1, n2 - 1):
            T[0, j] = (4.0 * T[1, j] - T[2, j]) / 3.0
            T[n1 - 1, j] = 1.0 - abs(x2[j])
        for i in range(n1):
            T[i, 0] = 0.0
            T[i, n2 - 1] = 0.0
    else:
        for i in range(1, n1 - 1):
            T[i, 0] = (4.0 * T[i, 1] - T[i, 2]) / 3.0
            T[i, n2 - 1] = (4.0 * T[i, n2 - 2] - T[i, n2 - 3]) / 3.0
        for j in range(n2):
            T[0, j] = 1.0
            T[n1 - 1, j] = 0.0


@njit(cache=True)
def velocity_bc(u1, u2, T, cyl, shear_coef, h1, h2, one_sided):
    """``shear_coef`` is Ma/Pr; the free-surface shear is ``-shear_coef * dT/ds``.

    The tangential surface velocity is only rewritten when ``one_sided`` is
    set; otherwise it is prognostic (see ``tendencies``).
    """
    n1, n2 = u1.shape
    if cyl:
        N = n1 - 1
        for j in range(1, n2 - 1):
            u1[0, j] = 0.0
            u2[0, j] = (4.0 * u2[1, j] - u2[2, j]) / 3.0
            u1[N, j] = 0.0
            if one_sided:
                s = -shear_coef * (T[N, j + 1] - T[N, j - 1]) / (2.0 * h2)
                u2[N, j] = (4.0 * u2[N - 1, j] - u2[N - 2, j] + 2.0 * h1 * s) / 3.0
        for i in range(n1):
            u1[i, 0] = 0.0
            u2[i, 0] = 0.0
            u1[i, n2 - 1] = 0.0
            u2[i, n2 - 1] = 0.0
    else:
        N = n2 - 1
        for i in range(1, n1 - 1):
            u2[i, N] = 0.0
            if one_sided:
                s = -shear_coef * (T[i + 1, N] - T[i - 1, N]) / (2.0 * h1)
                u1[i, N] = (4.0 * u1[i, N - 1] - u1[i, N - 2] + 2.0 * h2 * s) / 3.0
            u1[i, 0] = 0.0
            u2[i, 0] = 0.0
        for j in range(n2):
            u1[0, j] = 0.0
            u2[0, j] = 0.0
            u1[n1 - 1, j] = 0.0
            u2[n1 - 1, j] = 0.0


@njit(cache=True)
def first_nonfinite(a):
    n1, n2 = a.shape
    for i in range(n1):
        for j in range(n2):
            if not np.isfinite(a[i, j]):
                return i, j
    return -1, -1


@njit(cache=True)
def mean_abs_change(a0, a1, b0, b1):
    n1, n2 = a0.shape
    s = 0.0
    for i in range(n1):
        for j in range(n2):
            s += abs(a1[i, j] - a0[i, j]) + abs(b1[i, j] - b0[i, j])
    return s / (n1 * n2)
