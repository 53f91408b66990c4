"""Explicit time marching to the steady state."""

from __future__ import annotations

import logging
import math
import time as _time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .boundary import CaseKind
from .fields import FlowState, PhysParams, ScalarField, VectorField, apply_initial_conditions, effective_tau
from .operators import damping_coefficients, grid_metric
from .poisson import NeumannData, _boundary_term, _coefficients, default_pin, optimal_omega, sor_solve
from .postprocess import PsiField, stream_function

log = logging.getLogger(__name__)


class BlowUpError(RuntimeError):
    def __init__(self, step: int, field_name: str, node: tuple[int, int]):
        self.step = step
        self.field_name = field_name
        self.node = node
        super().__init__(f"non-finite {field_name} at node {node} on step {step}")


@dataclass
class SteadyResult:
    state: FlowState
    steps: int
    residual: float
    converged: bool
    wall_time: float
    history: list[tuple[int, float, float]] = field(default_factory=list)
    psi: PsiField | None = None
    poisson_failures: int = 0

    @property
    def psi_min(self) -> float:
        return self.psi.value if self.psi is not None else math.nan


def steady_residual(prev: FlowState, nxt: FlowState) -> float:
    """Mean over all nodes of ``|du1| + |du2|`` between two time levels."""
    if prev.grid != nxt.grid:
        raise ValueError("states live on different grids")
    a0, b0, _, _ = prev.arrays()
    a1, b1, _, _ = nxt.arrays()
    return float(K.mean_abs_change(a0, a1, b0, b1))


def cfl_estimate(grid, params: PhysParams, umax: float = 0.0) -> float:
    """Largest stable forward-Euler step suggested by diffusion and advection limits (advisory)."""
    hmin = min(grid.h1, grid.h2)
    nu = max(1.0, 1.0 / params.pr)
    limit = 0.25 * hmin ** 2 / nu
    if umax > 0:
        limit = min(limit, hmin / umax)
    return limit


class Stepper:
    """Array-level forward-Euler stepper for one grid / parameter set / case."""

    def __init__(self, grid, params: PhysParams, case: CaseKind):
        if grid.geometry is not case.geometry:
            raise ValueError("case geometry does not match the grid")
        self.grid = grid
        self.params = params
        self.case = case
        self.metric = grid_metric(grid)
        self.coef = _coefficients(grid)
        self.tau = effective_tau(params)
        self.k1, self.k2 = damping_coefficients(case.field_variant, params.ha)
        self.pin = default_pin(grid)
        self.omega = params.poisson_omega if params.poisson_omega is not None else optimal_omega(grid)
        self.max_iter = params.poisson_max_iter or 10 * grid.n1 * grid.n2
        self.shear = params.ma / params.pr
        self.one_sided = params.surface_shear == "one-sided"
        self.x2 = grid.x2
        self.last_sweeps = 0
        self.last_poisson_residual = 0.0
        self.poisson_failures = 0

    def convective(self, u1, u2, T):
        g = self.grid
        return K.convective(u1, u2, T, g.h1, g.h2, self.k1, self.k2, self.params.gr)

    def solve_pressure(self, u1, u2, T, p_guess, c1=None, c2=None) -> np.ndarray:
        g, m = self.grid, self.metric
        if c1 is None:
            c1, c2 = self.convective(u1, u2, T)
        rhs = K.poisson_rhs(u1, u2, c1, c2, 1.0 / self.tau, m.rf, m.vol1, m.vol2, m.r_lo, m.r_hi)
        if self.params.gr != 0.0:
            gr = self.params.gr
            lo2, hi2 = gr * T[:, 0], gr * T[:, -1]
            zero = np.zeros(g.n2)
            b = rhs - _boundary_term(g, NeumannData(zero, zero, lo2, hi2))
        else:
            b = rhs
        b = b - np.sum(self.coef.weights * b) / np.sum(self.coef.weights)
        threshold = self.params.poisson_tol * max(1.0, float(np.max(np.abs(rhs))))
        p = p_guess.copy()
        it, res = sor_solve(p, b, self.coef, self.omega, threshold, self.max_iter)
        p -= p[self.pin]
        self.last_sweeps = it
        self.last_poisson_residual = res
        if res > threshold:
            self.poisson_failures += 1
        return p

    def w(self, u1, u2, p, T, c1=None, c2=None):
        g = self.grid
        if c1 is None:
            c1, c2 = self.convective(u1, u2, T)
        return self.tau * (c1 + K.ddx1(p, g.h1)), self.tau * (c2 + K.ddx2(p, g.h2))

    def apply_bc(self, u1, u2, T):
        g = self.grid
        K.temperature_bc(T, g.is_cylindrical, self.x2)
        K.velocity_bc(u1, u2, T, g.is_cylindrical, self.shear, g.h1, g.h2, self.one_sided)

    def advance(self, u1, u2, p, T):
        """One step; returns new ``(u1, u2, p, T)`` arrays, inputs untouched."""
        g, m, prm = self.grid, self.metric, self.params
        c1, c2 = self.convective(u1, u2, T)
        p_new = self.solve_pressure(u1, u2, T, p, c1, c2)
        w1, w2 = self.w(u1, u2, p_new, T, c1, c2)
        du1, du2, dT = K.tendencies(u1, u2, p_new, T, w1, w2, g.h1, g.h2, m.rn, m.rf, m.vol1,
                                    m.cyl, self.tau, self.k1, self.k2, prm.gr, 1.0 / prm.pr,
                                    not self.one_sided, self.shear)
        dt = prm.dt
        u1n = u1 + dt * du1
        u2n = u2 + dt * du2
        Tn = T + dt * dT
        self.apply_bc(u1n, u2n, Tn)
        return u1n, u2n, p_new, Tn


def check_finite(step: int, **arrays) -> None:
    for name, a in arrays.items():
        i, j = K.first_nonfinite(a)
        if i >= 0:
            raise BlowUpError(step, name, (int(i), int(j)))


_stepper_cache: dict = {}


def _stepper(grid, params, case) -> Stepper:
    key = (grid, params, case)
    s = _stepper_cache.get(key)
    if s is None:
        if len(_stepper_cache) > 16:
            _stepper_cache.clear()
        s = _stepper_cache[key] = Stepper(grid, params, case)
    return s


def step(state: FlowState, params: PhysParams, case: CaseKind) -> FlowState:
    """Advance one forward-Euler step: pressure solve, w, tendencies, update, boundary conditions."""
    st = _stepper(state.grid, params, case)
    u1, u2, p, T = st.advance(*state.arrays())
    n = state.step_count + 1
    check_finite(n, u1=u1, u2=u2, p=p, T=T)
    return FlowState.from_arrays(state.grid, u1, u2, p, T, state.time + params.dt, n)


def psi_of(stepper: Stepper, u1, u2, p, T, step: int = -1) -> PsiField:
    g = stepper.grid
    w1, w2 = stepper.w(u1, u2, p, T)
    check_finite(step, w1=w1, w2=w2)
    state = FlowState.from_arrays(g, u1, u2, p, T)
    return stream_function(state, VectorField(ScalarField(g, w1), ScalarField(g, w2)), stepper.case)


def initial_state(config) -> FlowState:
    """Initial data with the boundary conditions already applied."""
    grid = config.grid
    st = _stepper(grid, config.params, config.case)
    s0 = apply_initial_conditions(FlowState.zeros(grid))
    u1, u2, p, T = (a.copy() for a in s0.arrays())
    st.apply_bc(u1, u2, T)
    return FlowState.from_arrays(grid, u1, u2, p, T)


def run_to_steady(config, progress: Callable[[int, float, float], None] | None = None,
                  state: FlowState | None = None) -> SteadyResult:
    """March until the steady measure drops below ``eps_steady``.

    With ``steady_measure="rate"`` the measure is :func:`steady_residual`
    divided by ``dt`` (the plain per-step change when ``dt == 0``); with
    ``"per-step"`` it is :func:`steady_residual` itself. The reported
    ``residual`` and history column hold the measure actually compared.
    History rows ``(step, residual, psi_min)`` are kept every
    ``config.history_stride`` steps; ``psi_min`` is sampled every
    ``config.snapshot_every`` steps and is NaN on the other rows.
    """
    grid, params = config.grid, config.params
    st = Stepper(grid, params, config.case)
    if state is None:
        state = initial_state(config)
    u1, u2, p, T = (a.copy() for a in state.arrays())
    n0 = state.step_count
    t0 = state.time
    log.info("advisory dt limit %.3e (dt = %.3e)", cfl_estimate(grid, params), params.dt)

    history: list[tuple[int, float, float]] = []
    stride = config.history_stride
    snap = config.snapshot_every
    eps = params.eps_steady
    scale = 1.0 / params.dt if params.steady_measure == "rate" and params.dt > 0 else 1.0
    residual = math.inf
    converged = False
    n = 0
    start = _time.perf_counter()
    for n in range(1, config.max_steps + 1):
        u1n, u2n, p, Tn = st.advance(u1, u2, p, T)
        residual = float(K.mean_abs_change(u1, u1n, u2, u2n)) * scale
        if not math.isfinite(residual):
            check_finite(n0 + n, u1=u1n, u2=u2n, p=p, T=Tn)
        u1, u2, T = u1n, u2n, Tn
        converged = residual < eps
        last = converged or n == config.max_steps
        psi_min = math.nan
        if n % snap == 0 or last:
            check_finite(n0 + n, u1=u1, u2=u2, p=p, T=T)
            psi_min = psi_of(st, u1, u2, p, T, n0 + n).value
            if progress is not None:
                progress(n0 + n, residual, psi_min)
            log.info("step %d residual %.4e psi_min %.5g", n0 + n, residual, psi_min)
        if n % stride == 0 or last:
            history.append((n0 + n, residual, psi_min))
        if converged:
            break
    wall = _time.perf_counter() - start
    final = FlowState.from_arrays(grid, u1, u2, p, T, t0 + n * params.dt, n0 + n)
    psi = psi_of(st, u1, u2, p, T, n0 + n)
    return SteadyResult(final, n0 + n, residual, converged, wall, history, psi, st.poisson_failures)


__all__ = ["BlowUpError", "SteadyResult", "Stepper", "steady_residual", "step", "run_to_steady",
           "initial_state", "cfl_estimate", "effective_tau"]
