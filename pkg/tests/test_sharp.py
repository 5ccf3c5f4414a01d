import csv
import functools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SP
from ldg_phasefield.fields import Grid2D, PTensorField, integrate
from ldg_phasefield.sharp import (BoundaryCurve, QuadraticFormField, Phi_of, VolumeBracketError,
                                  a_Q, c0, gamma_gap, generalized_sdf, recovery_phi,
                                  sandwich_ratio, sharp_energy, sharp_target, solve_chi,
                                  tanh_profile, write_gap_csv)
from ldg_phasefield.tensor import MaterialConstants, ModelParams, PTensor, QTensor

R = 0.169257
CIRCLE = BoundaryCurve.circle(radius=R)
ANISO = QuadraticFormField.constant_director(0.0, 1.0, SP)


@pytest.fixture(scope="module")
def ident_sdf():
    return generalized_sdf(QuadraticFormField.identity(), CIRCLE)


@pytest.fixture(scope="module")
def aniso_sdf():
    return generalized_sdf(ANISO, CIRCLE)


# curves

def test_curve_validation():
    th = 2 * np.pi * np.arange(20) / 20
    with pytest.raises(ValueError):
        BoundaryCurve(np.column_stack([np.cos(th), np.sin(th)]))
    th = 2 * np.pi * np.arange(64) / 64
    with pytest.raises(ValueError):
        BoundaryCurve(np.column_stack([0.5 + 0.1 * np.cos(th), 0.5 - 0.1 * np.sin(th)]))
    fig8 = np.column_stack([0.5 + 0.2 * np.sin(th), 0.5 + 0.1 * np.sin(2 * th)])
    with pytest.raises(ValueError):
        BoundaryCurve(fig8)


def test_curve_length_area_and_refinement():
    assert CIRCLE.length() == pytest.approx(2 * np.pi * R, rel=1e-6)
    assert CIRCLE.area() == pytest.approx(np.pi * R * R, rel=1e-6)
    e = BoundaryCurve.ellipse(a=0.2, b=0.1, angle=0.4)
    assert abs(e.length(4096) - e.length(2048)) < 1e-6
    assert e.is_simple() and e.inside_unit_square()
    assert not BoundaryCurve.circle(radius=0.6).inside_unit_square()


def test_curve_contains_and_distance():
    assert CIRCLE.contains(np.array([[0.5, 0.5], [0.9, 0.9]])).tolist() == [True, False]
    pts = np.array([[0.5 + R + 0.03, 0.5], [0.5, 0.5 - R + 0.02]])
    assert np.allclose(CIRCLE.distance(pts), [0.03, 0.02], atol=1e-8)


# forms

def test_a_Q_examples():
    q = QTensor.uniaxial(SP, [0, 0, 1])
    xi = np.array([0.3, -1.2, 0.0])  # eigenvalue -s_+/3 of the uniaxial tensor
    assert a_Q(q, xi, 0.0, SP) == pytest.approx(xi @ xi)
    assert a_Q(q, np.zeros(3), 2.0, SP) == 0.0
    assert a_Q(q, xi, 5.0, SP) == pytest.approx(xi @ xi, rel=1e-14)
    p = PTensor(SP / 2, 0.0)  # (P + s_+/2 I)(0, 1) = 0
    assert a_Q(p, [0.0, 2.0], 3.0, SP) == pytest.approx(4.0)
    assert a_Q(p, [1.0, 0.0], 1.0, SP) == pytest.approx(1 + SP ** 2)
    with pytest.raises(ValueError):
        a_Q(p, [1.0, 0.0], -1.0, SP)


def test_form_ellipticity_and_validation():
    assert ANISO.lam == pytest.approx(1.0) and ANISO.Lam == pytest.approx(1 + SP ** 2)
    assert ANISO.check_ellipticity()

    def p(x):
        return 0.4 * np.sin(2 * np.pi * x[..., 0]), 0.4 * np.cos(2 * np.pi * x[..., 1])
    assert QuadraticFormField.from_P(p, 1.0, SP, 0.4 * np.sqrt(2)).check_ellipticity()
    with pytest.raises(ValueError):
        QuadraticFormField.constant_matrix([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        QuadraticFormField(lambda x: x, 2.0, 1.0)


# sharp energy

def _params(oa):
    return ModelParams.from_physical(MaterialConstants.mbba(), 1e-6, omega_a_over_L=oa)


def test_sharp_energy_boundary_term_without_anchoring():
    par = _params(0.0)
    g = Grid2D(64)
    rng = np.random.default_rng(0)
    I = g.interior_mask()
    P = PTensorField(g, np.where(I, rng.normal(size=(64, 64)), 0), np.where(I, rng.normal(size=(64, 64)), 0))
    e = sharp_energy(P, BoundaryCurve.circle(radius=0.1693), par)
    assert e.boundary == pytest.approx(par.w_mix / 3 * 2 * np.pi * 0.1693, rel=1e-9)
    assert e.total == pytest.approx(e.boundary + e.ldg + e.void)


def test_sharp_energy_callable_and_void_complement():
    par = _params(1e7)
    g = Grid2D(65)

    def const(x):
        return np.full(x.shape[:-1], 0.3), np.zeros(x.shape[:-1])
    e = sharp_energy(const, CIRCLE, par, grid=g)
    assert e.void > 0 and e.boundary > par.w_mix / 3 * CIRCLE.length()
    with pytest.raises(ValueError):
        sharp_energy(const, CIRCLE, par)
    with pytest.raises(ValueError):
        sharp_energy(const, BoundaryCurve.circle(radius=0.55), par, grid=g)


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4), st.floats(0, 20))
def test_sandwich_bound_random_fields(c, ratio):
    def P(x):
        return (c[0] * np.sin(3 * x[..., 0]) + c[1], c[2] * np.cos(5 * x[..., 1]) + c[3])
    r = sandwich_ratio(P, CIRCLE, ratio, SP)
    assert 1 - 1e-12 <= r <= np.sqrt(2) + 1e-12


# standing wave

@pytest.mark.parametrize("eps", [0.04, 0.02, 0.01, 0.005])
def test_wave_monotone_and_endpoint(eps):
    w = solve_chi(eps)
    assert np.isfinite(w.eta) and w.eta > 0
    assert np.all(np.diff(w.chi) > 0)
    assert abs(w.chi_internal(w.eta) - 1.0) < 1e-10 and w.chi_internal(0.0) == 0.0


def test_eta_decreases_with_eps():
    etas = [solve_chi(e).eta for e in (0.04, 0.02, 0.01, 0.005)]
    assert all(b < a for a, b in zip(etas, etas[1:]))
    assert etas == pytest.approx([0.15339, 0.09384, 0.05541, 0.03181], abs=2e-5)


def test_wave_degenerate_potential_is_linear():
    eps = 0.01
    w = solve_chi(eps, W=lambda s: 0.0 * s, alpha=0.0, beta=1.0)
    assert w.eta == pytest.approx(np.sqrt(eps), rel=1e-9)
    t = np.linspace(0, w.eta, 7)
    assert np.allclose(w(t), t / np.sqrt(eps), atol=1e-9)


def test_wave_orientation_decreasing():
    w = solve_chi(0.01, alpha=1.0, beta=0.0)
    t = np.linspace(-0.01, w.eta + 0.01, 200)
    v = w(t)
    assert v[0] == 1.0 and v[-1] == 0.0 and np.all(np.diff(v) <= 0)
    with pytest.raises(ValueError):
        solve_chi(0.0)


def test_phi_and_c0():
    assert Phi_of(0.0) == 0.0
    assert Phi_of(1.0) == pytest.approx(1 / 6, abs=1e-12)
    for s in (0.2, 0.5, 0.9):
        assert Phi_of(s) == pytest.approx(s * s / 2 - s ** 3 / 3, abs=1e-12)
    assert c0(1.0, 0.0) == pytest.approx(1 / 6, abs=1e-12)
    assert c0(0.0, 1.0) == pytest.approx(1 / 6, abs=1e-12)


# generalized signed distance

def test_sdf_identity_circle(ident_sdf):
    rng = np.random.default_rng(0)
    th = rng.uniform(0, 2 * np.pi, 2000)
    rad = R + rng.uniform(-0.045, 0.045, 2000)
    res = ident_sdf.evaluate(0.5 + rad[:, None] * np.column_stack([np.cos(th), np.sin(th)]))
    assert res.in_band.all()
    assert np.max(np.abs(res.h - (rad - R))) < 1e-4
    assert ident_sdf.hamiltonian_drift() < 1e-8 and ident_sdf.u_minus_2s() < 1e-8


def test_sdf_out_of_band_signal(ident_sdf):
    res = ident_sdf.evaluate(np.array([[0.5, 0.5], [0.95, 0.95]]))
    assert not res.in_band.any() and np.isnan(res.h).all()


def test_sdf_diag_form_halves_distance_along_x():
    sdf = generalized_sdf(QuadraticFormField.constant_matrix(np.diag([4.0, 1.0])), CIRCLE)
    res = sdf.evaluate(np.array([[0.5 + R + 0.04, 0.5], [0.5 - R - 0.02, 0.5]]))
    assert np.allclose(res.h, [0.02, 0.01], atol=1e-8)


def test_sdf_sandwich_and_sign(aniso_sdf):
    rng = np.random.default_rng(1)
    pts = 0.5 + rng.uniform(-0.25, 0.25, (20000, 2))
    res = aniso_sdf.evaluate(pts)
    sel = np.nonzero(res.in_band)[0][:1000]
    assert sel.size == 1000
    d = CIRCLE.distance(pts[sel])
    ah = np.abs(res.h[sel])
    assert np.all(ah >= d / np.sqrt(ANISO.Lam) * (1 - 1e-6))
    assert np.all(ah <= d / np.sqrt(ANISO.lam) * (1 + 1e-6) + 1e-12)
    inside = CIRCLE.contains(pts[sel])
    assert np.all(((res.h[sel] < 0) == inside) | (d < 1e-9))
    assert aniso_sdf.hamiltonian_drift() < 1e-8


def test_hamiltonian_error_is_fourth_order():
    def p(x):
        return 0.4 * np.sin(2 * np.pi * x[..., 0]), 0.4 * np.cos(2 * np.pi * x[..., 1])
    form = QuadraticFormField.from_P(p, 1.0, SP, 0.4 * np.sqrt(2))
    a = generalized_sdf(form, CIRCLE, steps=8)
    b = generalized_sdf(form, CIRCLE, steps=16)
    assert (a.s_in, a.s_out) == (b.s_in, b.s_out)
    assert a.hamiltonian_drift() / b.hamiltonian_drift() >= 8.0


def test_sdf_rejects_curve_outside_square():
    with pytest.raises(ValueError):
        generalized_sdf(QuadraticFormField.identity(), BoundaryCurve.circle(radius=0.52))


# recovery sequence

def test_recovery_volume_and_bounds(aniso_sdf):
    g = Grid2D(101)
    rec = recovery_phi(aniso_sdf, solve_chi(0.02, alpha=1.0, beta=0.0), 0.09, g)
    assert abs(integrate(rec.phi) - 0.09) < 1e-9
    assert rec.phi.values.min() >= 0.0 and rec.phi.values.max() <= 1.0
    assert rec.phi.satisfies_dirichlet()


@functools.cache
def _ident_sdf():
    return generalized_sdf(QuadraticFormField.identity(), CIRCLE)


@settings(max_examples=15)
@given(st.floats(0, 0.0938), st.floats(0, 0.0938))
def test_recovery_volume_monotone_in_delta(d1, d2):
    sdf = _ident_sdf()
    w = solve_chi(0.02, alpha=1.0, beta=0.0)
    g = Grid2D(65)
    lo, hi = sorted((d1, d2))
    v_lo = integrate(recovery_phi(sdf, w, 0.09, g, delta=lo).phi)
    v_hi = integrate(recovery_phi(sdf, w, 0.09, g, delta=hi).phi)
    assert v_hi <= v_lo + 1e-15


def test_recovery_approaches_indicator(ident_sdf):
    g = Grid2D(201)
    X, Y = g.mesh()
    r = np.hypot(X - 0.5, Y - 0.5)
    far = np.nonzero((np.abs(r - R) > 0.01).ravel())[0]
    pick = np.random.default_rng(0).choice(far, 1000, replace=False)
    ind = (r.ravel() < R)[pick]
    frac = []
    for eps in (0.02, 0.01, 0.005):
        rec = recovery_phi(ident_sdf, solve_chi(eps, alpha=1.0, beta=0.0), CIRCLE.area(), g)
        frac.append(np.mean(rec.phi.values.ravel()[pick] != ind))
    assert frac[0] > frac[1] > frac[2]


def test_recovery_tanh_profile(ident_sdf):
    f, (lo, hi) = tanh_profile(0.01)
    assert f(lo - 1) == 1.0 and f(hi + 1) == 0.0 and f(0.0) == pytest.approx(0.5)
    t = np.linspace(lo, hi, 1001)
    assert np.all(np.diff(f(t)) <= 1e-15)
    g = Grid2D(201)
    rec = recovery_phi(ident_sdf, None, 0.09, g, profile="tanh", eps=0.01)
    assert abs(integrate(rec.phi) - 0.09) < 1e-9


def test_recovery_errors(ident_sdf):
    w = solve_chi(0.02, alpha=1.0, beta=0.0)
    with pytest.raises(VolumeBracketError):
        recovery_phi(ident_sdf, w, 0.5, Grid2D(65))
    with pytest.raises(VolumeBracketError):
        recovery_phi(ident_sdf, w, 1.5, Grid2D(65))
    with pytest.raises(ValueError):
        recovery_phi(ident_sdf, w, 0.09, Grid2D(65), profile="erf")


# gap diagnostic

def test_gamma_gap_table_and_csv(tmp_path):
    rows = gamma_gap(QuadraticFormField.identity(), CIRCLE, [0.04, 0.02])
    assert rows[1].rel_gap < rows[0].rel_gap
    assert rows[0].sharp_target == pytest.approx(2 * np.pi * R / 3, rel=1e-9)
    assert rows[0].n == 65 and rows[1].n == 101
    write_gap_csv(tmp_path / "g.csv", rows)
    with open(tmp_path / "g.csv", newline="") as fh:
        data = list(csv.reader(fh))
    assert data[0] == ["eps", "diffuse", "sharp_target", "rel_gap", "equipartition_ratio"]
    assert float(data[2][3]) == rows[1].rel_gap
    with pytest.raises(ValueError):
        gamma_gap(QuadraticFormField.identity(), CIRCLE, [0.01, 0.02])


def test_target_invariant_under_rigid_motion():
    e = BoundaryCurve.ellipse(a=0.2, b=0.12, angle=0.3)
    moved = e.rigid_motion(0.0, (0.05, -0.07))
    assert sharp_target(ANISO, moved) == pytest.approx(sharp_target(ANISO, e), rel=1e-10)
    ident = QuadraticFormField.identity()
    # rotate by 1.1 rad about the centre (0.5, 0.5)
    c = np.array([0.5, 0.5])
    cr, sr = np.cos(1.1), np.sin(1.1)
    turned = e.rigid_motion(1.1, c - np.array([[cr, -sr], [sr, cr]]) @ c)
    assert sharp_target(ident, turned) == pytest.approx(sharp_target(ident, e), rel=1e-10)
