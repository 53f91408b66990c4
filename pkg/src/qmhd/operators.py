"""Discrete operators and right-hand sides of the inductionless QMHD system.

Both geometries share one set of kernels. The planar equations are the
Cartesian form of the axisymmetric ones: radial metric factors become 1 and
the hoop stress disappears.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .fields import FieldVariant, FlowState, Grid, PhysParams, ScalarField, VectorField, effective_tau


@dataclass(frozen=True)
class Metric:
    """Radial metric factors of the node-centred control volumes."""

    rn: np.ndarray    # node radius (ones for planar)
    rf: np.ndarray    # radius of the faces between nodes i and i+1
    vol1: np.ndarray  # radial width of each control volume, weighted by r
    vol2: np.ndarray  # axial width of each control volume
    r_lo: float
    r_hi: float
    cyl: bool


@functools.lru_cache(maxsize=32)
def grid_metric(grid: Grid) -> Metric:
    h1, h2 = grid.h1, grid.h2
    vol2 = np.full(grid.n2, h2)
    vol2[0] = vol2[-1] = 0.5 * h2
    if grid.is_cylindrical:
        rn = grid.x1.copy()
        edges = np.concatenate(([0.0], 0.5 * (rn[1:] + rn[:-1]), [rn[-1]]))
        rf = edges[1:-1].copy()
        vol1 = 0.5 * (edges[1:] ** 2 - edges[:-1] ** 2)
        r_lo, r_hi = float(edges[0]), float(edges[-1])
    else:
        rn = np.ones(grid.n1)
        rf = np.ones(grid.n1 - 1)
        vol1 = np.full(grid.n1, h1)
        vol1[0] = vol1[-1] = 0.5 * h1
        r_lo = r_hi = 1.0
    for a in (rn, rf, vol1, vol2):
        a.setflags(write=False)
    return Metric(rn, rf, vol1, vol2, r_lo, r_hi, grid.is_cylindrical)


def damping_coefficients(variant: FieldVariant, ha: float) -> tuple[float, float]:
    """Ha^2 weights on (u1, u2): the field damps the component perpendicular to it."""
    variant = FieldVariant(variant)
    if variant is FieldVariant.NONE:
        if ha != 0:
            raise ValueError("Ha > 0 needs a field direction (variant A/axial or B)")
        return 0.0, 0.0
    if variant is FieldVariant.VERTICAL:
        return ha * ha, 0.0
    return 0.0, ha * ha


@dataclass
class StressComponents:
    pi_11: ScalarField
    pi_12: ScalarField
    pi_22: ScalarField
    pi_phiphi: ScalarField | None = None


@dataclass
class Tendency:
    d_u1: ScalarField | None = None
    d_u2: ScalarField | None = None
    d_T: ScalarField | None = None


def deriv1(f: ScalarField, direction: int) -> ScalarField:
    """First derivative along ``direction`` (1 or 2): central inside, one-sided at the ends."""
    g = f.grid
    if direction == 1:
        return ScalarField(g, K.ddx1(f.values, g.h1))
    if direction == 2:
        return ScalarField(g, K.ddx2(f.values, g.h2))
    raise ValueError(f"direction must be 1 or 2, got {direction!r}")


def cyl_div_r(f: ScalarField) -> ScalarField:
    """``(1/r) d(r f)/dr``, using ``2 df/dr`` on the axis."""
    g = f.grid
    if not g.is_cylindrical:
        raise ValueError("cyl_div_r needs a cylindrical grid")
    r = g.x1[:, None]
    out = np.empty(g.shape)
    d_rf = K.ddx1(r * f.values, g.h1)
    out[1:] = d_rf[1:] / r[1:]
    out[0] = 2.0 * K.ddx1(f.values, g.h1)[0]
    return ScalarField(g, out)


def _convective(state: FlowState, params: PhysParams, variant: FieldVariant):
    g = state.grid
    u1, u2, _, T = state.arrays()
    k1, k2 = damping_coefficients(variant, params.ha)
    return K.convective(u1, u2, T, g.h1, g.h2, k1, k2, params.gr)


def compute_w(state: FlowState, params: PhysParams,
              variant: FieldVariant = FieldVariant.NONE) -> VectorField:
    """Node values of the regularising velocity ``w = tau (u.grad u + grad p + Ha^2 u_perp - Gr T e2)``."""
    g = state.grid
    tau = effective_tau(params)
    c1, c2 = _convective(state, params, variant)
    p = state.pressure.values
    w1 = tau * (c1 + K.ddx1(p, g.h1))
    w2 = tau * (c2 + K.ddx2(p, g.h2))
    return VectorField(ScalarField(g, w1), ScalarField(g, w2))


def ns_stress(state: FlowState) -> StressComponents:
    g = state.grid
    u1, u2, _, _ = state.arrays()
    d1u1 = K.ddx1(u1, g.h1)
    pi_12 = K.ddx2(u1, g.h2) + K.ddx1(u2, g.h1)
    pi_22 = 2.0 * K.ddx2(u2, g.h2)
    pi_phiphi = None
    if g.is_cylindrical:
        r = g.x1[:, None]
        phi = np.empty(g.shape)
        phi[1:] = 2.0 * u1[1:] / r[1:]
        phi[0] = 2.0 * d1u1[0]
        pi_phiphi = ScalarField(g, phi)
    return StressComponents(ScalarField(g, 2.0 * d1u1), ScalarField(g, pi_12),
                            ScalarField(g, pi_22), pi_phiphi)


def _all_tendencies(state: FlowState, w: VectorField, params: PhysParams, variant: FieldVariant):
    g = state.grid
    m = grid_metric(g)
    u1, u2, p, T = state.arrays()
    k1, k2 = damping_coefficients(variant, params.ha)
    return K.tendencies(u1, u2, p, T, w.c1.values, w.c2.values, g.h1, g.h2,
                        m.rn, m.rf, m.vol1, m.cyl, effective_tau(params), k1, k2,
                        params.gr, 1.0 / params.pr, params.surface_shear == "flux",
                        params.ma / params.pr)


def momentum_rhs(state: FlowState, w: VectorField, params: PhysParams,
                 variant: FieldVariant = FieldVariant.NONE) -> Tendency:
    """Velocity tendencies at interior nodes, with every term of the momentum equations in flux form.

    In ``"flux"`` surface mode the tangential component on the free surface
    is filled in too.
    """
    du1, du2, _ = _all_tendencies(state, w, params, variant)
    g = state.grid
    return Tendency(d_u1=ScalarField(g, du1), d_u2=ScalarField(g, du2))


def energy_rhs(state: FlowState, w: VectorField, params: PhysParams,
               variant: FieldVariant = FieldVariant.NONE) -> Tendency:
    _, _, dT = _all_tendencies(state, w, params, variant)
    return Tendency(d_T=ScalarField(state.grid, dT))


def pressure_poisson_rhs(state: FlowState, params: PhysParams,
                         variant: FieldVariant = FieldVariant.NONE) -> ScalarField:
    """Right side of the pressure equation, ``div(u)/tau - div(C)``, on every control volume.

    Boundary control volumes take their wall flux from the boundary node
    values, which is what makes the result compatible with the Neumann data.
    """
    g = state.grid
    m = grid_metric(g)
    tau = effective_tau(params)
    c1, c2 = _convective(state, params, variant)
    u1, u2, _, _ = state.arrays()
    rhs = K.poisson_rhs(u1, u2, c1, c2, 1.0 / tau, m.rf, m.vol1, m.vol2, m.r_lo, m.r_hi)
    return ScalarField(g, rhs)


__all__ = [
    "Metric", "grid_metric", "damping_coefficients", "StressComponents", "Tendency",
    "deriv1", "cyl_div_r", "compute_w", "ns_stress", "momentum_rhs", "energy_rhs",
    "pressure_poisson_rhs",
]
