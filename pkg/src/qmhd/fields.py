"""Grids, node fields, flow state and nondimensional parameters."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np


class Geometry(str, enum.Enum):
    CYLINDRICAL = "cylindrical"
    PLANAR = "planar"


class FieldVariant(str, enum.Enum):
    """Orientation of the applied magnetic field.

    ``VERTICAL`` is the field along the second coordinate (the cylinder axis,
    or the vertical direction in the square cavity, "variant A"); it damps
    the first velocity component. ``HORIZONTAL`` ("variant B") is the field
    along the first coordinate and damps the second component.
    """

    VERTICAL = "A"
    HORIZONTAL = "B"
    NONE = "none"

    @classmethod
    def parse(cls, text: str) -> "FieldVariant":
        key = text.strip().lower()
        aliases = {
            "a": cls.VERTICAL,
            "axial": cls.VERTICAL,
            "vertical": cls.VERTICAL,
            "b": cls.HORIZONTAL,
            "horizontal": cls.HORIZONTAL,
            "none": cls.NONE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown field variant {text!r}") from None


class NonFiniteFieldError(ValueError):
    """A field contains NaN or infinite values."""


@dataclass(frozen=True)
class Grid:
    """Uniform node-centred mesh; node counts include both boundaries."""

    geometry: Geometry
    n1: int
    n2: int
    extent1: tuple[float, float]
    extent2: tuple[float, float]

    def __post_init__(self):
        if self.n1 < 3 or self.n2 < 3:
            raise ValueError(f"grid needs at least 3 nodes per direction, got {self.n1}x{self.n2}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def h1(self) -> float:
        lo, hi = self.extent1
        return (hi - lo) / (self.n1 - 1)

    @property
    def h2(self) -> float:
        lo, hi = self.extent2
        return (hi - lo) / (self.n2 - 1)

    @property
    def x1(self) -> np.ndarray:
        lo, hi = self.extent1
        x = lo + self.h1 * np.arange(self.n1)
        x[-1] = hi
        return x

    @property
    def x2(self) -> np.ndarray:
        lo, hi = self.extent2
        x = lo + self.h2 * np.arange(self.n2)
        x[-1] = hi
        return x

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as two ``(n1, n2)`` arrays."""
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    @property
    def is_cylindrical(self) -> bool:
        return self.geometry is Geometry.CYLINDRICAL


def make_grid(geometry: Geometry | str, n1: int, n2: int, *,
              nodes_include_boundary: bool = True, half_height: float = 1.0) -> Grid:
    """Build the grid for one of the two cavity geometries.

    The cylindrical cavity spans ``r in [0, 1]``, ``z in [-A, A]``; the
    square cavity spans the unit square. With ``nodes_include_boundary``
    false, ``n1`` and ``n2`` count interior nodes only.
    """
    geometry = Geometry(geometry)
    n1, n2 = int(n1), int(n2)
    if not nodes_include_boundary:
        n1, n2 = n1 + 2, n2 + 2
    if n1 < 3 or n2 < 3:
        raise ValueError(f"grid needs at least 3 nodes per direction, got {n1}x{n2}")
    if geometry is Geometry.CYLINDRICAL:
        return Grid(geometry, n1, n2, (0.0, 1.0), (-half_height, half_height))
    return Grid(geometry, n1, n2, (0.0, 1.0), (0.0, 1.0))


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            bad = np.argwhere(~np.isfinite(self.values))[0]
            raise NonFiniteFieldError(f"non-finite value at node {tuple(int(k) for k in bad)}")

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    c1: ScalarField
    c2: ScalarField

    def __post_init__(self):
        if self.c1.grid != self.c2.grid:
            raise ValueError("vector components live on different grids")

    @property
    def grid(self) -> Grid:
        return self.c1.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid))

    def copy(self) -> "VectorField":
        return VectorField(self.c1.copy(), self.c2.copy())


@dataclass
class FlowState:
    velocity: VectorField
    pressure: ScalarField
    temperature: ScalarField
    time: float = 0.0
    step_count: int = 0

    def __post_init__(self):
        g = self.velocity.grid
        if self.pressure.grid != g or self.temperature.grid != g:
            raise ValueError("state fields live on different grids")

    @property
    def grid(self) -> Grid:
        return self.velocity.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "FlowState":
        return cls(VectorField.zeros(grid), ScalarField.zeros(grid), ScalarField.zeros(grid))

    @classmethod
    def from_arrays(cls, grid: Grid, u1, u2, p, T, time: float = 0.0, step_count: int = 0) -> "FlowState":
        return cls(
            VectorField(ScalarField(grid, u1), ScalarField(grid, u2)),
            ScalarField(grid, p),
            ScalarField(grid, T),
            time,
            step_count,
        )

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.velocity.c1.values, self.velocity.c2.values,
                self.pressure.values, self.temperature.values)

    def copy(self) -> "FlowState":
        return FlowState(self.velocity.copy(), self.pressure.copy(), self.temperature.copy(),
                         self.time, self.step_count)


SURFACE_SHEAR_MODES = ("flux", "one-sided")
STEADY_MEASURES = ("rate", "per-step")


@dataclass(frozen=True)
class PhysParams:
    """Dimensionless groups plus time-stepping and pressure-solve controls.

    ``poisson_max_iter=None`` means ``10 * n1 * n2`` sweeps;
    ``poisson_omega=None`` picks the relaxation factor from the grid size.
    ``surface_shear`` selects how the thermocapillary stress is imposed:
    ``"flux"`` (stress as the wall flux of the surface half cell, the
    surface velocity is then prognostic) or ``"one-sided"`` (boundary value
    solved from a second-order one-sided difference).
    ``steady_measure`` selects what is compared with ``eps_steady``:
    ``"rate"`` (mean per-step velocity change divided by ``dt``) or
    ``"per-step"`` (the mean change itself).
    ``poisson_tol`` is relative to ``max(1, max|rhs|)``.
    """

    gr: float = 0.0
    ha: float = 0.0
    pr: float = 0.018
    ma: float = 0.0
    re_s: float = 1.0e7
    tau0: float = 0.0
    dt: float = 1.0e-7
    eps_steady: float = 1.0e-3
    poisson_tol: float = 1.0e-11
    poisson_max_iter: int | None = None
    poisson_omega: float | None = None
    surface_shear: str = "flux"
    steady_measure: str = "per-step"

    def __post_init__(self):
        checks = [
            ("pr", self.pr > 0, "Pr > 0"),
            ("re_s", self.re_s > 0, "Re_s > 0"),
            ("dt", self.dt >= 0, "dt >= 0"),
            ("tau0", self.tau0 >= 0, "tau0 >= 0"),
            ("ha", self.ha >= 0, "Ha >= 0"),
            ("eps_steady", self.eps_steady > 0, "eps_steady > 0"),
            ("poisson_tol", self.poisson_tol > 0, "poisson_tol > 0"),
        ]
        for name, ok, rule in checks:
            if not ok:
                raise ValueError(f"invalid {name}={getattr(self, name)!r}: requires {rule}")
        if self.poisson_max_iter is not None and self.poisson_max_iter < 1:
            raise ValueError("invalid poisson_max_iter: requires poisson_max_iter >= 1")
        if self.poisson_omega is not None and not 0.0 < self.poisson_omega < 2.0:
            raise ValueError("invalid poisson_omega: requires 0 < omega < 2")
        if self.surface_shear not in SURFACE_SHEAR_MODES:
            raise ValueError(f"invalid surface_shear={self.surface_shear!r}: "
                             f"requires one of {', '.join(SURFACE_SHEAR_MODES)}")
        if self.steady_measure not in STEADY_MEASURES:
            raise ValueError(f"invalid steady_measure={self.steady_measure!r}: "
                             f"requires one of {', '.join(STEADY_MEASURES)}")
        for name in ("gr", "ha", "pr", "ma", "re_s", "tau0", "dt"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"invalid {name}: must be finite")

    @property
    def tau(self) -> float:
        return effective_tau(self)

    def with_(self, **changes) -> "PhysParams":
        return replace(self, **changes)


def effective_tau(params: PhysParams) -> float:
    """Regularisation time ``1/Re_s**2 + tau0``."""
    if params.re_s <= 0:
        raise ValueError("Re_s must be positive")
    tau = 1.0 / params.re_s ** 2 + params.tau0
    if not tau > 0:
        raise ValueError("effective tau must be positive")
    return tau


@dataclass(frozen=True)
class DimensionalInputs:
    """Dimensional material and setup data (any consistent unit system, e.g. CGS)."""

    R: float
    nu: float
    c_s: float
    chi: float
    beta: float = 1.0
    g: float = 0.0
    Theta: float = 1.0
    H0: float = 0.0
    sigma: float = 1.0
    eta: float = 1.0
    c_light: float = 2.99792458e10
    dsigma_dT: float = 0.0  # surface-tension temperature derivative

    def __post_init__(self):
        for name in ("R", "nu", "c_s", "chi", "beta", "Theta", "sigma", "eta", "c_light"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("g", "H0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)!r}")


def dimensionless_groups(d: DimensionalInputs) -> PhysParams:
    gr = d.g * d.beta * d.Theta * d.R ** 3 / d.nu ** 2
    ha = d.R * d.H0 / d.c_light * math.sqrt(d.sigma / d.eta)
    pr = d.nu / d.chi
    re_s = d.c_s * d.R / d.nu
    ma = -d.Theta * d.R / (d.eta * d.chi) * d.dsigma_dT
    return PhysParams(gr=gr, ha=ha, pr=pr, ma=ma, re_s=re_s)


def apply_initial_conditions(state: FlowState, grid: Grid | None = None) -> FlowState:
    """Quiescent fluid with the conduction-like starting temperature.

    Cylinder: ``T = 1 - |z|``. Square cavity: ``T = 1 - x``.
    """
    grid = grid or state.grid
    if state.grid != grid:
        raise ValueError("state is not allocated on the requested grid")
    X1, X2 = grid.mesh()
    if grid.is_cylindrical:
        T = 1.0 - np.abs(X2)
    else:
        T = 1.0 - X1
    return FlowState.from_arrays(grid, np.zeros(grid.shape), np.zeros(grid.shape),
                                 np.zeros(grid.shape), T)


__all__ = [
    "Geometry", "FieldVariant", "Grid", "ScalarField", "VectorField", "FlowState",
    "PhysParams", "DimensionalInputs", "NonFiniteFieldError", "make_grid",
    "dimensionless_groups", "apply_initial_conditions", "effective_tau",
]
