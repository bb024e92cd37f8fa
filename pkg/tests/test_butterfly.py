from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsvi.butterfly import (
    A_func,
    A_star,
    Y_func,
    alpha_bar,
    bound_ratio,
    butterfly_bound,
    check_butterfly,
    classify_regions,
    easy_necessary,
    g_alpha,
    gj_sufficient,
    golden_min,
    phi_expr,
    psi_upper_bound,
    sym_svi_bound,
    u_star,
    z_nu,
    z_nu_numeric,
    z_star_nu,
)
from gsvi.errors import DomainError, PreconditionError
from gsvi.surface import (
    GenSurface,
    PsiShape,
    catalog,
    const_phi,
    exp_phi,
    linear_theta,
    power_psi,
    sqrt_psi,
    svi_psi,
)


def test_golden_min_on_parabola():
    z, f = golden_min(lambda x: (x - 0.3) ** 2 + 1, -2, 5)
    assert z == pytest.approx(0.3, abs=1e-7) and f == pytest.approx(1.0)


def test_symmetric_svi_region_boundary():
    r = classify_regions(svi_psi(0.0))
    assert r.zbar_plus_boundary == pytest.approx((-math.sqrt(3), math.sqrt(3)), abs=1e-8)
    # Phi < 0 between the roots, > 0 outside
    assert not r.zbar_plus(np.array([0.0, 1.0])).any()
    assert r.zbar_plus(np.array([-2.0, 2.0])).all()


def test_knots_excluded_from_regions():
    r = classify_regions(sqrt_psi())
    assert not r.zbar_plus(np.array([0.0]))[0]
    assert not r.zplus(1.0, np.array([0.0]))[0]
    with pytest.raises(DomainError):
        r.zplus(0.0, np.array([1.0]))


@settings(max_examples=100, deadline=None)
@given(z=st.floats(-50, 50), u=st.floats(0.01, 3.99))
def test_ratio_equals_closed_form_A(z, u):
    psi = svi_psi(0.0)
    y = math.sqrt(1 + z * z)
    den = 8 * (y - 2) + u * y * (y - 1)
    r = float(bound_ratio(psi, z, u))
    if den > 1e-9:
        assert r == pytest.approx(float(A_func(y, u)), rel=1e-9)
    elif den < -1e-9:
        assert r == math.inf


@pytest.mark.parametrize("u", [0.1, 0.5, 1.0, 2.0, 3.0, 3.9])
def test_numeric_bound_matches_A_star(u):
    b = butterfly_bound(svi_psi(0.0), u)
    assert b.bound == pytest.approx(float(A_star(u)), rel=1e-6)
    y = math.sqrt(1 + b.argmin_z**2)
    assert y == pytest.approx(float(Y_func(u)), rel=1e-4)


@pytest.mark.parametrize("u", [4.0, 5.0, 10.0])
def test_numeric_bound_saturates_at_16(u):
    assert butterfly_bound(svi_psi(0.0), u).bound == pytest.approx(16.0, abs=1e-3)
    assert sym_svi_bound(u) == 16.0


def test_Y_is_the_minimiser_of_A():
    # oracle: brute-force minimum over y > 2 on a fine grid
    y = np.linspace(2.0001, 400, 400001)
    for u in (0.3, 1.0, 2.5):
        vals = np.asarray(A_func(y, u))
        vals = np.where(8 * (y - 2) + u * y * (y - 1) > 0, vals, np.inf)
        assert float(A_star(u)) == pytest.approx(vals.min(), rel=1e-8)
        assert float(Y_func(u)) == pytest.approx(y[vals.argmin()], rel=1e-3)


def test_A_spot_values():
    for u in (0.5, 1.0, 2.0):
        assert float(A_func(2.0, u)) == pytest.approx(48.0)
    assert float(A_star(0.0)) == 0.0
    a = np.asarray(A_star(np.linspace(0, 3.99, 100)))
    assert np.all(np.diff(a) > 0) and a.max() < 16
    with pytest.raises(DomainError):
        Y_func(4.0)


def test_regions_variants():
    psi = svi_psi(0.0)
    full = butterfly_bound(psi, 1.0, "zplus").bound
    inner = butterfly_bound(psi, 1.0, "zbar_plus").bound
    outer = butterfly_bound(psi, 1.0, "zbar_minus_zplus").bound
    assert full == pytest.approx(min(inner, outer))
    with pytest.raises(ValueError):
        butterfly_bound(psi, 1.0, "everywhere")


def test_examples_pass(ex1, ex2):
    for s in (ex1, ex2, catalog("svi")):
        v = check_butterfly(s)
        assert v.passed, v.witnesses[:3]
        assert v.lmb_status == "ok"


def test_oversized_alpha_fails_with_m_infinity_witness():
    v = check_butterfly(catalog("nonsvi_power", nu=3.5, alpha=3.0))
    assert not v.passed
    kinds = {w["condition"] for w in v.witnesses}
    assert {"second_coupling", "m_infinity", "lmb"} <= kinds
    assert v.m_inf_condition["M"] == 3.0
    assert v.m_inf_condition["inf_value"] == pytest.approx(z_nu(3.5), rel=1e-9)
    d = json.loads(v.to_json())
    assert set(d) >= {"pass", "per_u", "m_inf_condition", "jumps_ok", "lmb_ok"}
    assert set(d["per_u"][0]) >= {"u", "lhs", "bound", "argmin_z"}


def test_lmb_marginal_at_slope_two():
    # svi slope (1 + rho)/2 = 1 with M_infinity = 2: theta phi alpha_+ -> 2
    s = GenSurface(svi_psi(0.0), exp_phi(4.0), linear_theta())
    v = check_butterfly(s)
    assert v.lmb_status in ("marginal", "fail") and not v.passed


def test_negative_jump_fails():
    psi = PsiShape(
        lambda z: 1 + z * z - 0.25 * np.abs(z),
        lambda z, side=0: 2 * z - 0.25 * np.where(z == 0, side, np.sign(z)),
        lambda z, side=0: np.full_like(np.asarray(z, dtype=float), 2.0),
        knots=(0.0,), jumps=(-0.5,), name="concave kink",
    )
    v = check_butterfly(GenSurface(psi, exp_phi(0.1), linear_theta()), u_grid=np.array([0.5, 1.0]))
    assert not v.jumps_ok and not v.passed


def test_exact_condition_beats_classical_sufficient_conditions():
    # phi = 3 at u = 1: u phi^2 (1 + |rho|) = 9 > 4, yet (u phi)^2 = 9 <= A*(1)
    gj = gj_sufficient(0.0, const_phi(3.0), linear_theta(), u_grid=np.array([1.0]))
    assert not gj.conditions[4]
    s = GenSurface(svi_psi(0.0), const_phi(3.0), linear_theta())
    v = check_butterfly(s, u_grid=np.array([1.0]))
    assert v.per_u[0]["ok"]
    assert v.per_u[0]["lhs"] == 9.0 and v.per_u[0]["bound"] == pytest.approx(10.835161, abs=1e-6)


def test_gj_holds_for_heston_like_svi():
    s = catalog("svi", rho=0.2)
    assert gj_sufficient(0.2, s.phi, s.theta).all


def test_easy_necessary():
    en = easy_necessary(svi_psi(0.0), 1.0)
    assert en.inf_value == pytest.approx(4.0)  # tail limit 2 / alpha_+ with alpha_+ = 1/2
    with pytest.raises(PreconditionError):
        easy_necessary(PsiShape(lambda z: 1 + z * z, lambda z, s=0: 2 * z, lambda z, s=0: 2 + 0 * z), 1.0)


def test_upper_bound_holds_for_power_shape():
    ub = psi_upper_bound(power_psi(3.5), 1.0)
    assert ub.verdict and ub.z_plus is not None and ub.kappa is not None
    assert ub.margin >= -1e-12


def test_upper_bound_unavailable_for_tight_M():
    ub = psi_upper_bound(sqrt_psi(), 2.0)
    assert not ub.verdict and ub.witness_z is not None


def test_power_shape_constants():
    assert u_star() == pytest.approx(1.87006, abs=1e-4)
    assert alpha_bar() == pytest.approx(1.33452, abs=1e-4)
    assert float(g_alpha(u_star(), 2.0)) == pytest.approx(4 * float(g_alpha(u_star())))
    assert z_nu(2.0) == pytest.approx(4 * 2 * 2 ** -0.5 * 3 ** -0.5)
    assert z_nu(1000.0) == pytest.approx(2.0, abs=0.01)
    with pytest.raises(DomainError):
        z_nu(1.0)


@settings(max_examples=20, deadline=None)
@given(nu=st.floats(1.05, 20))
def test_z_nu_numeric_matches_closed_form(nu):
    assert z_nu_numeric(nu) == pytest.approx(z_nu(nu), rel=1e-7)


@pytest.mark.parametrize("nu", [2.0, 3.5, 8.0])
def test_z_star_maximises_Phi(nu):
    psi = power_psi(nu)
    z = np.linspace(0.01, 5, 500001)
    phi = np.asarray(phi_expr(psi, z))
    assert z[phi.argmax()] == pytest.approx(z_star_nu(nu), abs=1e-3)
    assert 0 < phi.max() < 1
