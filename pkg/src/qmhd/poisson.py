"""Red-black SOR solver for the pure-Neumann pressure equation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .fields import Grid, ScalarField
from .operators import grid_metric

log = logging.getLogger(__name__)


@dataclass
class NeumannData:
    """Prescribed ``dp/dx1`` on the x1 = lo/hi walls and ``dp/dx2`` on the x2 = lo/hi walls.

    Values are coordinate derivatives, not outward-normal ones.
    """

    lo1: np.ndarray  # length n2
    hi1: np.ndarray  # length n2
    lo2: np.ndarray  # length n1
    hi2: np.ndarray  # length n1

    @classmethod
    def homogeneous(cls, grid: Grid) -> "NeumannData":
        return cls(np.zeros(grid.n2), np.zeros(grid.n2), np.zeros(grid.n1), np.zeros(grid.n1))

    def check(self, grid: Grid) -> None:
        for name, arr, n in (("lo1", self.lo1, grid.n2), ("hi1", self.hi1, grid.n2),
                             ("lo2", self.lo2, grid.n1), ("hi2", self.hi2, grid.n1)):
            if np.shape(arr) != (n,):
                raise ValueError(f"Neumann segment {name} needs {n} values, got {np.shape(arr)}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"Neumann segment {name} has non-finite values")


@dataclass
class PoissonReport:
    iterations: int
    residual: float
    converged: bool
    tolerance: float = 0.0
    projection: float = 0.0
    history: list[tuple[int, float]] = field(default_factory=list)


@dataclass(frozen=True)
class _Coefficients:
    cE: np.ndarray
    cW: np.ndarray
    cN: np.ndarray
    cS: np.ndarray
    weights: np.ndarray  # control-volume measure per node


_coef_cache: dict[Grid, _Coefficients] = {}


def _coefficients(grid: Grid) -> _Coefficients:
    c = _coef_cache.get(grid)
    if c is None:
        m = grid_metric(grid)
        h1, h2 = grid.h1, grid.h2
        cE = np.zeros(grid.n1)
        cW = np.zeros(grid.n1)
        cE[:-1] = m.rf / (h1 * m.vol1[:-1])
        cW[1:] = m.rf / (h1 * m.vol1[1:])
        cN = np.zeros(grid.n2)
        cS = np.zeros(grid.n2)
        cN[:-1] = 1.0 / (h2 * m.vol2[:-1])
        cS[1:] = 1.0 / (h2 * m.vol2[1:])
        c = _Coefficients(cE, cW, cN, cS, np.outer(m.vol1, m.vol2))
        _coef_cache[grid] = c
    return c


def _boundary_term(grid: Grid, bc: NeumannData) -> np.ndarray:
    m = grid_metric(grid)
    out = np.zeros(grid.shape)
    out[0, :] -= m.r_lo * np.asarray(bc.lo1) / m.vol1[0]
    out[-1, :] += m.r_hi * np.asarray(bc.hi1) / m.vol1[-1]
    out[:, 0] -= np.asarray(bc.lo2) / m.vol2[0]
    out[:, -1] += np.asarray(bc.hi2) / m.vol2[-1]
    return out


def default_pin(grid: Grid) -> tuple[int, int]:
    """Pressure reference node: (r=0, z~0) for the cylinder, the centre node for the square."""
    if grid.is_cylindrical:
        return (0, (grid.n2 - 1) // 2)
    return ((grid.n1 - 1) // 2, (grid.n2 - 1) // 2)


def optimal_omega(grid: Grid) -> float:
    """SOR factor from the Jacobi spectral radius of the Neumann Laplacian on this grid."""
    a1 = 1.0 / grid.h1 ** 2
    a2 = 1.0 / grid.h2 ** 2
    mu = (a1 * math.cos(math.pi / (grid.n1 - 1)) + a2 * math.cos(math.pi / (grid.n2 - 1))) / (a1 + a2)
    return 2.0 / (1.0 + math.sqrt(1.0 - mu * mu))


def laplacian(p: ScalarField, bc: NeumannData) -> ScalarField:
    """Control-volume Laplacian (with the cylindrical metric where applicable) and wall fluxes ``bc``."""
    g = p.grid
    m = grid_metric(g)
    out = K.fv_laplacian(p.values, np.asarray(bc.lo1, float), np.asarray(bc.hi1, float),
                         np.asarray(bc.lo2, float), np.asarray(bc.hi2, float),
                         g.h1, g.h2, m.rf, m.vol1, m.vol2, m.r_lo, m.r_hi)
    return ScalarField(g, out)


def residual_norm(p: ScalarField, rhs: ScalarField, bc: NeumannData) -> float:
    return float(np.max(np.abs(laplacian(p, bc).values - rhs.values)))


def solve_poisson(rhs: ScalarField, bc: NeumannData, pin: tuple[int, int] | None = None,
                  tol: float = 1e-8, max_iter: int | None = None, *,
                  omega: float | None = None, p0: np.ndarray | None = None,
                  check_every: int = 4, record_history: bool = False) -> tuple[ScalarField, PoissonReport]:
    """Solve ``lap(p) = rhs`` with Neumann data ``bc`` and ``p[pin] = 0``.

    The incompatible part of the data (its control-volume weighted mean) is
    removed first. Convergence means the max-norm residual of the projected
    system is at most ``tol * max(1, max|rhs|)``. ``p0`` warm-starts the
    iteration and is not modified.
    """
    g = rhs.grid
    bc.check(g)
    if not tol > 0:
        raise ValueError("tol must be positive")
    pin = default_pin(g) if pin is None else (int(pin[0]), int(pin[1]))
    if not (0 <= pin[0] < g.n1 and 0 <= pin[1] < g.n2):
        raise ValueError(f"pin {pin} outside the {g.n1}x{g.n2} grid")
    if max_iter is None:
        max_iter = 10 * g.n1 * g.n2
    omega = optimal_omega(g) if omega is None else float(omega)

    c = _coefficients(g)
    b = rhs.values - _boundary_term(g, bc)
    projection = float(np.sum(c.weights * b) / np.sum(c.weights))
    b = b - projection
    threshold = tol * max(1.0, float(np.max(np.abs(rhs.values))))

    p = np.zeros(g.shape) if p0 is None else np.array(p0, dtype=float, copy=True)
    history: list[tuple[int, float]] | None = [] if record_history else None
    it, res = sor_solve(p, b, c, omega, threshold, max_iter,
                        1 if record_history else check_every, history)
    p -= p[pin]
    converged = res <= threshold
    if not converged:
        log.debug("pressure solve stopped at %d sweeps, residual %.3e > %.3e", it, res, threshold)
    return ScalarField(g, p), PoissonReport(it, float(res), converged, threshold, projection,
                                            history or [])


def sor_solve(p: np.ndarray, b: np.ndarray, c: _Coefficients, omega: float, threshold: float,
              max_iter: int, check_every: int = 4,
              history: list | None = None) -> tuple[int, float]:
    """Iterate in place until the residual drops to ``threshold``; returns (sweeps, residual)."""
    it = 0
    res = K.operator_residual(p, b, c.cE, c.cW, c.cN, c.cS)
    if history is not None:
        history.append((0, res))
    step = max(1, int(check_every))
    while res > threshold and it < max_iter:
        n = min(step, max_iter - it)
        K.sor_sweeps(p, b, c.cE, c.cW, c.cN, c.cS, omega, n)
        it += n
        res = K.operator_residual(p, b, c.cE, c.cW, c.cN, c.cS)
        if history is not None:
            history.append((it, res))
    return it, res


__all__ = ["NeumannData", "PoissonReport", "solve_poisson", "residual_norm", "laplacian",
           "default_pin", "optimal_omega"]
