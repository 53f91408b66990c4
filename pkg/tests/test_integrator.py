import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmhd import (
    CaseKind,
    FieldVariant,
    FlowState,
    PhysParams,
    apply_all_bc,
    make_grid,
    parse_config,
    run_to_steady,
    step,
    steady_residual,
)
from qmhd.integrator import BlowUpError, Stepper, cfl_estimate, initial_state

from .conftest import state_from


def _cylinder_conduction(g):
    """Discrete conduction state: solve the affine fixed-point problem of one step with u = 0."""
    st_ = Stepper(g, PhysParams(ma=0.0, dt=1.0), CaseKind("cylindrical"))
    zero = np.zeros(g.shape)
    inner = (slice(1, -1), slice(1, -1))

    def residual(x):
        T = zero.copy()
        T[inner] = x.reshape(g.n1 - 2, g.n2 - 2)
        st_.apply_bc(zero.copy(), zero.copy(), T)
        return (st_.advance(zero, zero, zero, T)[3] - T)[inner].ravel(), T

    n = (g.n1 - 2) * (g.n2 - 2)
    b = residual(np.zeros(n))[0]
    A = np.column_stack([residual(e)[0] - b for e in np.eye(n)])
    return residual(np.linalg.solve(A, -b))[1]


def _conduction(geo):
    if geo == "planar":
        g = make_grid(geo, 12, 12)
        return g, state_from(g, T=lambda x, y: 1 - x)
    g = make_grid(geo, 12, 22)
    return g, state_from(g, T=_cylinder_conduction(g))


# ---------------------------------------------------------------- steady_residual

def test_residual_identical_states(planar12):
    s = state_from(planar12, u1=lambda x, y: x, u2=lambda x, y: y)
    assert steady_residual(s, s) == 0.0


def test_residual_single_node(planar12):
    a = FlowState.zeros(planar12)
    b = a.copy()
    b.velocity.c1.values[3, 4] = 0.6
    assert steady_residual(a, b) == pytest.approx(0.6 / 144, rel=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_residual_matches_summation_oracle(seed):
    g = make_grid("planar", 5, 5)
    rng = np.random.default_rng(seed)
    a = FlowState.from_arrays(g, *(rng.normal(size=g.shape) for _ in range(4)))
    b = FlowState.from_arrays(g, *(rng.normal(size=g.shape) for _ in range(4)))
    total = 0.0
    for i in range(5):
        for j in range(5):
            total += abs(b.velocity.c1.values[i, j] - a.velocity.c1.values[i, j])
            total += abs(b.velocity.c2.values[i, j] - a.velocity.c2.values[i, j])
    assert steady_residual(a, b) == pytest.approx(total / 25, rel=1e-13)


def test_residual_grid_mismatch(planar12, cyl12):
    with pytest.raises(ValueError):
        steady_residual(FlowState.zeros(planar12), FlowState.zeros(cyl12))


# ---------------------------------------------------------------- step

@pytest.mark.parametrize("geo,ha", [("planar", 0.0), ("planar", 50.0), ("cylindrical", 100.0)])
def test_quiescent_conduction_is_fixed_point(geo, ha):
    g, s = _conduction(geo)
    variant = FieldVariant.NONE if ha == 0 else FieldVariant.VERTICAL
    prm = PhysParams(ha=ha, tau0=2e-5, ma=0.0, gr=0.0)
    out = step(s, prm, CaseKind(geo, variant))
    for a, b in zip(s.arrays(), out.arrays()):
        assert np.max(np.abs(a - b)) <= 1e-12
    assert out.step_count == 1 and out.time == pytest.approx(1e-7)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), geo=st.sampled_from(["planar", "cylindrical"]))
def test_zero_dt_leaves_fields_unchanged(seed, geo):
    g = make_grid(geo, 9, 11)
    rng = np.random.default_rng(seed)
    case = CaseKind(geo, FieldVariant.VERTICAL)
    prm = PhysParams(ha=10.0, ma=1000.0, tau0=2e-5, dt=0.0)
    s = apply_all_bc(FlowState.from_arrays(g, *(rng.normal(size=g.shape) for _ in range(4)), 0.5, 7),
                     case, prm)
    out = step(s, prm, case)
    for name in ("c1", "c2"):
        np.testing.assert_array_equal(getattr(out.velocity, name).values, getattr(s.velocity, name).values)
    np.testing.assert_array_equal(out.temperature.values, s.temperature.values)
    assert out.step_count == 8 and out.time == 0.5


def test_first_step_forcing_sits_at_free_surface():
    cfg = parse_config("preset = table1-ha50\nn1 = 21\nn2 = 41")
    s0 = initial_state(cfg)
    s1 = step(s0, cfg.params, cfg.case)
    u1, u2, p, _ = s1.arrays()
    assert not u1.any()
    assert np.max(np.abs(p)) < 1e-12
    assert np.all(u2[:-1] == 0.0)
    assert np.max(np.abs(u2[-1])) > 0
    # upper half flows up the wall towards the cold lid... i.e. away from the hot mid-plane
    j = int(np.argmin(np.abs(cfg.grid.x2 - 0.5)))
    assert u2[-1, j] > 0 and u2[-1, -j - 1] < 0


def test_stepper_rejects_mismatched_case(planar12):
    with pytest.raises(ValueError):
        Stepper(planar12, PhysParams(), CaseKind("cylindrical"))


def test_blow_up_names_step_and_node():
    case = CaseKind("planar", FieldVariant.VERTICAL)
    prm = PhysParams(ha=50.0, ma=1000.0, tau0=2e-5, dt=5e-2)
    s = initial_state(parse_config("preset = table2-ha50-A-22\nn1 = 12\nn2 = 12"))
    with pytest.raises(BlowUpError) as info:
        for _ in range(500):
            s = step(s, prm, case)
    err = info.value
    assert err.step >= 1 and len(err.node) == 2
    assert f"step {err.step}" in str(err)


def test_cfl_estimate():
    g = make_grid("planar", 42, 42)
    prm = PhysParams(pr=0.018)
    lim = cfl_estimate(g, prm)
    assert lim == pytest.approx(0.25 * (1 / 41) ** 2 * 0.018)
    assert cfl_estimate(g, prm, umax=1e6) < lim


# ---------------------------------------------------------------- run_to_steady

def _small(extra="", **over):
    over = {"snapshot_every": 500, "max_steps": 200000, **over}
    return parse_config("geometry = planar\nn1 = 12\nn2 = 12\nha = 20\nfield_variant = A\n"
                        "ma = 200\npr = 0.018\n" + extra, over)


def test_pure_conduction_converges():
    cfg = parse_config("geometry = planar\nn1 = 12\nn2 = 12\nha = 0\nma = 0\npr = 0.018\nmax_steps = 50")
    r = run_to_steady(cfg)
    assert r.converged and r.steps == 1
    u1, u2, _, T = r.state.arrays()
    assert not u1.any() and not u2.any()
    np.testing.assert_allclose(T, 1 - cfg.grid.mesh()[0], atol=1e-14)


def test_small_case_converges_with_consistent_history():
    cfg = parse_config("preset = table2-ha100-A\nn1 = 12\nn2 = 12\nsteady_measure = per-step\n"
                       "eps_steady = 1e-6\nsnapshot_every = 1000\nhistory_every = 500\nmax_steps = 300000")
    r = run_to_steady(cfg)
    assert r.converged and r.residual < cfg.params.eps_steady
    steps = [h[0] for h in r.history]
    assert steps == sorted(steps) and steps[-1] == r.steps
    assert r.psi_min < 0 and r.psi_min == r.history[-1][2]
    # late-stage trend of the residual is non-increasing
    res = np.array([h[1] for h in r.history])
    n = np.array(steps, dtype=float)
    late = n >= 0.9 * r.steps
    assert np.count_nonzero(late) >= 3
    assert np.polyfit(n[late], np.log(res[late]), 1)[0] <= 0


def test_rate_and_per_step_measures_differ_by_dt():
    a = run_to_steady(_small("history_every = 1", max_steps=20))
    b = run_to_steady(_small("history_every = 1\nsteady_measure = per-step", max_steps=20))
    ra = np.array([h[1] for h in a.history])
    rb = np.array([h[1] for h in b.history])
    np.testing.assert_allclose(ra * 1e-7, rb, rtol=1e-12)
    np.testing.assert_array_equal(a.state.velocity.c1.values, b.state.velocity.c1.values)


def test_runs_are_bitwise_deterministic():
    cfg = _small(max_steps=300, snapshot_every=100)
    a, b = run_to_steady(cfg), run_to_steady(cfg)
    assert a.history == b.history
    for x, y in zip(a.state.arrays(), b.state.arrays()):
        np.testing.assert_array_equal(x, y)


def test_not_converged_keeps_history():
    r = run_to_steady(_small("history_every = 1", max_steps=30))
    assert not r.converged and r.steps == 30 and len(r.history) == 30
    assert np.isnan(r.history[0][2]) and np.isfinite(r.history[-1][2])


def test_restart_continues_step_count():
    cfg = _small(max_steps=40)
    first = run_to_steady(cfg.with_(max_steps=20))
    second = run_to_steady(cfg.with_(max_steps=20), state=first.state)
    whole = run_to_steady(cfg)
    assert second.steps == 40
    for x, y in zip(second.state.arrays(), whole.state.arrays()):
        np.testing.assert_array_equal(x, y)


def test_cylinder_short_run_mirror_symmetry():
    cfg = parse_config("preset = table1-ha50\nn1 = 22\nn2 = 42\nmax_steps = 10000\nsnapshot_every = 10000")
    r = run_to_steady(cfg)
    u1, u2, _, T = r.state.arrays()
    for a, sign in ((u1, 1), (u2, -1), (T, 1)):
        scale = np.max(np.abs(a))
        assert scale > 0
        assert np.max(np.abs(a - sign * a[:, ::-1])) <= 1e-6 * scale
