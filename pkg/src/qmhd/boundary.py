"""Velocity, temperature and pressure boundary conditions for both cavities.

Cylinder: axis r=0 (symmetry), free lateral surface r=1 with the
thermocapillary shear, rigid isothermal lids z=+-1. Square: hot wall x=0,
cold wall x=1, rigid adiabatic bottom, free adiabatic top y=1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .fields import FieldVariant, FlowState, Geometry, Grid, PhysParams
from .poisson import NeumannData


class Wall(str, enum.Enum):
    LO1 = "lo1"  # r = 0 or x = 0
    HI1 = "hi1"  # r = 1 or x = 1
    LO2 = "lo2"  # z = -1 or y = 0
    HI2 = "hi2"  # z = +1 or y = 1


@dataclass(frozen=True)
class CaseKind:
    geometry: Geometry
    field_variant: FieldVariant = FieldVariant.NONE

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        object.__setattr__(self, "field_variant", FieldVariant(self.field_variant))

    @property
    def free_surface(self) -> Wall:
        return Wall.HI1 if self.geometry is Geometry.CYLINDRICAL else Wall.HI2

    @classmethod
    def for_grid(cls, grid: Grid, variant: FieldVariant | str = FieldVariant.NONE) -> "CaseKind":
        return cls(grid.geometry, FieldVariant(variant))


def _check(state: FlowState, case: CaseKind) -> Grid:
    g = state.grid
    if g.geometry is not case.geometry:
        raise ValueError(f"state grid is {g.geometry.value}, case is {case.geometry.value}")
    return g


def apply_temperature_bc(state: FlowState, case: CaseKind) -> FlowState:
    """Return a copy with the wall temperatures (Dirichlet and adiabatic) enforced."""
    g = _check(state, case)
    out = state.copy()
    K.temperature_bc(out.temperature.values, g.is_cylindrical, g.x2)
    return out


def apply_velocity_bc(state: FlowState, case: CaseKind, params: PhysParams) -> FlowState:
    """Return a copy with no-slip, symmetry and free-surface conditions enforced.

    On the free surface the normal velocity is zero. With
    ``params.surface_shear == "one-sided"`` the tangential boundary value is
    solved from the second-order one-sided form of
    ``du_t/dn = -(Ma/Pr) dT/ds``, reading T along the surface as it stands;
    in ``"flux"`` mode it is left alone because the momentum balance of the
    surface half cell already carries the stress.
    """
    g = _check(state, case)
    out = state.copy()
    u1, u2, _, T = out.arrays()
    K.velocity_bc(u1, u2, T, g.is_cylindrical, params.ma / params.pr, g.h1, g.h2,
                  params.surface_shear == "one-sided")
    return out


def apply_all_bc(state: FlowState, case: CaseKind, params: PhysParams) -> FlowState:
    """Temperature first, since the surface shear reads the boundary temperature."""
    return apply_velocity_bc(apply_temperature_bc(state, case), case, params)


def pressure_bc_data(state: FlowState, case: CaseKind, params: PhysParams) -> NeumannData:
    """Zero normal gradient on vertical walls and the axis, ``dp/dx2 = Gr T`` on the horizontal ones."""
    g = _check(state, case)
    T = state.temperature.values
    return NeumannData(
        lo1=np.zeros(g.n2),
        hi1=np.zeros(g.n2),
        lo2=params.gr * T[:, 0].copy(),
        hi2=params.gr * T[:, -1].copy(),
    )


__all__ = ["Wall", "CaseKind", "apply_temperature_bc", "apply_velocity_bc", "apply_all_bc",
           "pressure_bc_data"]
