import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmhd import (
    DimensionalInputs,
    FieldVariant,
    FlowState,
    Geometry,
    PhysParams,
    ScalarField,
    VectorField,
    apply_initial_conditions,
    dimensionless_groups,
    effective_tau,
    make_grid,
)
from qmhd.fields import NonFiniteFieldError


def test_cylindrical_grid_82x162():
    g = make_grid(Geometry.CYLINDRICAL, 82, 162)
    assert g.extent1 == (0.0, 1.0) and g.extent2 == (-1.0, 1.0)
    assert g.h1 == pytest.approx(1 / 81, rel=1e-15)
    assert g.h2 == pytest.approx(2 / 161, rel=1e-15)


def test_planar_grid_42x42():
    g = make_grid("planar", 42, 42)
    assert g.h1 == g.h2 == pytest.approx(1 / 41, rel=1e-15)


def test_smallest_grid():
    g = make_grid("planar", 3, 3)
    assert g.h1 == 0.5 and g.h2 == 0.5


@pytest.mark.parametrize("n1,n2", [(2, 5), (5, 2), (0, 0)])
def test_grid_rejects_too_few_nodes(n1, n2):
    with pytest.raises(ValueError):
        make_grid("planar", n1, n2)


def test_interior_node_count_option():
    g = make_grid("planar", 40, 40, nodes_include_boundary=False)
    assert g.shape == (42, 42)


@settings(max_examples=50, deadline=None)
@given(geo=st.sampled_from(["planar", "cylindrical"]), n1=st.integers(3, 400), n2=st.integers(3, 400))
def test_grid_spacing_reproduces_extent(geo, n1, n2):
    g = make_grid(geo, n1, n2)
    assert g.x1[0] == g.extent1[0] and g.x1[-1] == g.extent1[1]
    assert g.x2[0] == g.extent2[0] and g.x2[-1] == g.extent2[1]
    assert abs(g.extent1[0] + (n1 - 1) * g.h1 - g.extent1[1]) < 1e-14
    assert abs(g.extent2[0] + (n2 - 1) * g.h2 - g.extent2[1]) < 1e-14


def test_scalar_field_rejects_nonfinite_and_bad_shape(planar12):
    bad = np.zeros(planar12.shape)
    bad[3, 4] = np.nan
    with pytest.raises(NonFiniteFieldError):
        ScalarField(planar12, bad)
    with pytest.raises(ValueError):
        ScalarField(planar12, np.zeros((3, 3)))


def test_vector_components_share_grid(planar12, cyl12):
    with pytest.raises(ValueError):
        VectorField(ScalarField.zeros(planar12), ScalarField.zeros(cyl12))


def test_phys_params_validation_names_field():
    for kw, name in [({"pr": 0.0}, "pr"), ({"re_s": -1.0}, "re_s"), ({"tau0": -1e-9}, "tau0"),
                     ({"ha": -1.0}, "ha"), ({"dt": -1e-7}, "dt")]:
        with pytest.raises(ValueError, match=name):
            PhysParams(**kw)
    with pytest.raises(ValueError, match="surface_shear"):
        PhysParams(surface_shear="ghost")
    with pytest.raises(ValueError, match="steady_measure"):
        PhysParams(steady_measure="max")


def test_effective_tau_examples():
    assert effective_tau(PhysParams(re_s=1e7, tau0=2e-7)) == pytest.approx(2.00000000000001e-7, rel=1e-14)
    assert effective_tau(PhysParams(re_s=10.0, tau0=0.0)) == pytest.approx(0.01)
    assert effective_tau(PhysParams(re_s=1e7, tau0=2e-5)) == pytest.approx(2e-5)


def test_dimensionless_groups_examples():
    d = DimensionalInputs(R=1.0, nu=0.01, c_s=1e5, chi=0.5)
    p = dimensionless_groups(d)
    assert p.re_s == pytest.approx(1e7)
    assert p.ha == 0.0
    assert p.gr == 0.0
    assert p.pr == pytest.approx(0.02)


def test_marangoni_sign_follows_surface_tension_slope():
    # surface tension falling with temperature drives a positive Ma
    d = DimensionalInputs(R=1.0, nu=0.01, c_s=1e5, chi=0.5, eta=0.06, Theta=10.0, dsigma_dT=-0.1)
    assert dimensionless_groups(d).ma == pytest.approx(10.0 * 0.1 / (0.06 * 0.5))


@settings(max_examples=40, deadline=None)
@given(R=st.floats(0.1, 10), nu=st.floats(1e-3, 1), H0=st.floats(0, 1e4), g=st.floats(0, 1e3))
def test_dimensionless_groups_scale_with_radius(R, nu, H0, g):
    base = dict(nu=nu, c_s=1e5, chi=0.3, g=g, H0=H0, beta=1e-4, sigma=1e16, eta=0.05)
    a = dimensionless_groups(DimensionalInputs(R=R, **base))
    b = dimensionless_groups(DimensionalInputs(R=2 * R, **base))
    assert b.gr == pytest.approx(8 * a.gr, rel=1e-12, abs=1e-300)
    assert b.ha == pytest.approx(2 * a.ha, rel=1e-12, abs=1e-300)
    assert b.re_s == pytest.approx(2 * a.re_s, rel=1e-12)
    assert b.pr == a.pr


def test_dimensional_inputs_reject_nonpositive():
    with pytest.raises(ValueError, match="nu"):
        DimensionalInputs(R=1.0, nu=0.0, c_s=1.0, chi=1.0)
    with pytest.raises(ValueError, match="H0"):
        DimensionalInputs(R=1.0, nu=1.0, c_s=1.0, chi=1.0, H0=-1.0)


def test_initial_conditions_cylinder():
    g = make_grid("cylindrical", 21, 41)
    s = apply_initial_conditions(FlowState.zeros(g))
    T = s.temperature.values
    i = int(round(0.5 / g.h1))
    j0 = int(np.argmin(np.abs(g.x2)))
    assert T[i, j0] == 1.0
    assert np.all(T[:, 0] == 0.0) and np.all(T[:, -1] == 0.0)
    assert not s.velocity.c1.values.any() and not s.velocity.c2.values.any()
    assert not s.pressure.values.any()
    assert s.time == 0.0 and s.step_count == 0


def test_initial_conditions_planar():
    g = make_grid("planar", 11, 11)
    T = apply_initial_conditions(FlowState.zeros(g)).temperature.values
    assert np.all(T[-1, :] == 0.0)
    assert np.all(T[0, :] == 1.0)
    np.testing.assert_allclose(T[:, 5], 1.0 - g.x1)


def test_initial_conditions_idempotent(cyl12):
    a = apply_initial_conditions(FlowState.zeros(cyl12))
    b = apply_initial_conditions(a)
    for x, y in zip(a.arrays(), b.arrays()):
        np.testing.assert_array_equal(x, y)


def test_initial_conditions_grid_mismatch(planar12, cyl12):
    with pytest.raises(ValueError):
        apply_initial_conditions(FlowState.zeros(planar12), cyl12)


@pytest.mark.parametrize("text,expected", [
    ("A", FieldVariant.VERTICAL), ("vertical", FieldVariant.VERTICAL), ("axial", FieldVariant.VERTICAL),
    ("b", FieldVariant.HORIZONTAL), ("horizontal", FieldVariant.HORIZONTAL), ("none", FieldVariant.NONE),
])
def test_field_variant_parse(text, expected):
    assert FieldVariant.parse(text) is expected


def test_field_variant_parse_rejects_unknown():
    with pytest.raises(ValueError):
        FieldVariant.parse("diagonal")


def test_state_copy_is_independent(planar12):
    s = apply_initial_conditions(FlowState.zeros(planar12))
    c = s.copy()
    c.temperature.values[1, 1] = 42.0
    assert s.temperature.values[1, 1] != 42.0
    assert math.isclose(s.temperature.values[1, 1], 1 - planar12.x1[1])
