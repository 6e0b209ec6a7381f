import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kuo_spectra.errors import AssumptionError, ConfigError, DomainError, ParameterError
from kuo_spectra.extended import ExtendedReal
from kuo_spectra.profile import (ShearProfile, characteristic_quantities, class_K_plus_test,
                                 evaluate, load_profile, m_beta, profile_from_dict, sinus)

PI2 = math.pi ** 2


def test_evaluate_examples(sin_profile, couette_profile):
    assert evaluate(sin_profile, 0.0, 0) == pytest.approx(1.0, abs=1e-15)
    assert evaluate(sin_profile, 1.0, 2) == pytest.approx(PI2 / 2, rel=1e-14)
    assert evaluate(couette_profile, 0.3, 1) == 1.0


def test_evaluate_rejects_outside_points(sin_profile):
    with pytest.raises(DomainError):
        evaluate(sin_profile, 1.5)
    with pytest.raises(ParameterError):
        evaluate(sin_profile, 0.0, 4)


@given(st.floats(-1, 1), st.integers(0, 3))
def test_sinus_derivatives_match_closed_form(y, k):
    exact = [(1 + math.cos(math.pi * y)) / 2, -math.pi * math.sin(math.pi * y) / 2,
             -PI2 * math.cos(math.pi * y) / 2, math.pi ** 3 * math.sin(math.pi * y) / 2][k]
    assert evaluate(sinus(), y, k) == pytest.approx(exact, abs=1e-12)


@given(st.floats(-1, 0.999), st.floats(1e-14, 1e-2))
def test_increment_matches_direct_difference(a, s):
    p = sinus()
    s = min(s, 1 - a)
    exact = -math.sin(math.pi * (2 * a + s) / 2) * math.sin(math.pi * s / 2)
    got = float(p.increment(a, s))
    assert got == pytest.approx(exact, rel=1e-9, abs=1e-14 * s)


def test_increment_is_exact_at_the_extremal_points(sin_profile):
    for s in (1e-3, 1e-9, 1e-16, 1e-30):
        rel = float(sin_profile.increment(-1.0, s)) / math.sin(math.pi * s / 2) ** 2 - 1
        assert abs(rel) < 1e-14


def test_sinus_quantities(sin_profile):
    q = sin_profile.quantities
    assert q.u_min == pytest.approx(0.0, abs=1e-15) and q.u_max == pytest.approx(1.0)
    assert q.argmin_set == (-1.0, 1.0) and q.argmax_set == (0.0,)
    assert q.kappa_plus.value == evaluate(sin_profile, 1.0, 2)
    assert q.kappa_plus.value == pytest.approx(PI2 / 2, rel=1e-14)
    assert q.kappa_minus.value == pytest.approx(-PI2 / 2, rel=1e-14)
    assert q.beta_plus.value == pytest.approx(9 * PI2 / 16, rel=1e-14)
    assert q.beta_minus.value == pytest.approx(-PI2 / 2, rel=1e-14)
    assert q.mu_plus is None
    assert q.mu_minus.value == pytest.approx(-PI2 / 2, rel=1e-14)


def test_couette_quantities_are_infinite(couette_profile):
    q = couette_profile.quantities
    assert q.kappa_plus == ExtendedReal.pos_inf()
    assert q.kappa_minus == ExtendedReal.neg_inf()
    assert q.critical_points == ()


def test_poiseuille_quantities(poiseuille_profile):
    q = poiseuille_profile.quantities
    assert q.kappa_plus.value == pytest.approx(2.0)
    assert q.mu_plus.value == pytest.approx(2.0)
    assert q.beta_plus.value == pytest.approx(2.0)
    assert q.argmin_set == (0.0,)


@pytest.mark.parametrize("name", ["sin_profile", "couette_profile", "poiseuille_profile"])
def test_quantities_do_not_depend_on_scan_density(name, request):
    p = request.getfixturevalue(name)
    a = characteristic_quantities(p, scan=2048).to_json()
    b = characteristic_quantities(p, scan=8192).to_json()
    for key in a:
        va, vb = a[key], b[key]
        if isinstance(va, list):
            assert np.allclose(va, vb, atol=1e-10, rtol=0)
        elif isinstance(va, float):
            assert va == pytest.approx(vb, abs=1e-10)
        else:
            assert va == vb


def test_degenerate_critical_point_is_rejected():
    # u = y^3 has u' = u'' = 0 at y = 0.
    with pytest.raises(AssumptionError):
        ShearProfile("polynomial", (-1.0, 1.0), [0.0, 0.0, 0.0, 1.0]).quantities


def test_m_beta_examples(sin_profile, poiseuille_profile):
    assert m_beta(sin_profile, PI2 / 4) == 0
    assert m_beta(sin_profile, -0.55 * PI2) == 1
    assert m_beta(poiseuille_profile, 1.5) == 0
    with pytest.raises(ParameterError):
        m_beta(sin_profile, 0.6 * PI2)


def test_m_beta_jumps_at_minus_half_pi_squared(sin_profile):
    betas = np.linspace(-0.5625 * PI2, -0.01 * PI2, 60)
    vals = [m_beta(sin_profile, b) for b in betas]
    assert all(v == (1 if b < -PI2 / 2 else 0) for b, v in zip(betas, vals))
    assert m_beta(sin_profile, -PI2 / 2) == 0


@pytest.mark.parametrize("beta", [PI2 / 4, 0.0])
def test_sinus_is_class_k_plus(sin_profile, beta):
    cert = class_K_plus_test(sin_profile, beta)
    assert cert.u_beta == pytest.approx(0.5 - beta / PI2, abs=1e-12)
    assert cert.K_min == pytest.approx(PI2, abs=1e-8)
    assert cert.K_max == pytest.approx(PI2, abs=1e-8)


def test_class_k_plus_precondition(couette_profile):
    with pytest.raises(ParameterError):
        class_K_plus_test(couette_profile, 0.5)


@given(st.floats(-PI2 / 2, PI2 / 2))
def test_class_k_plus_sinus_property(beta):
    cert = class_K_plus_test(sinus(), beta)
    assert cert is not None
    assert abs(cert.K_min - PI2) < 1e-8 and abs(cert.K_max - PI2) < 1e-8


def test_profile_config_round_trip(tmp_path):
    p = ShearProfile("polynomial", (-1.0, 2.0), [0.1, 0.0, 1.0])
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_json()))
    q = load_profile(str(path))
    assert q.to_json() == p.to_json()
    assert evaluate(q, 0.5) == pytest.approx(0.35)


@pytest.mark.parametrize("obj", [{"domain": [0, 1]}, {"kind": "polynomial", "domain": [1, 0],
                                                      "coefficients": [0, 1]},
                                 {"kind": "nope", "domain": [0, 1]}])
def test_bad_configs(obj):
    with pytest.raises(ConfigError):
        profile_from_dict(obj)


def test_spline_profile_matches_its_samples():
    ys = np.linspace(-1, 1, 41)
    p = ShearProfile("sampled-spline", (-1.0, 1.0), {"y": ys.tolist(), "u": (ys ** 2).tolist()})
    assert evaluate(p, 0.3) == pytest.approx(0.09, abs=1e-9)
    assert evaluate(p, 0.3, 2) == pytest.approx(2.0, abs=1e-6)
    assert p.quantities.kappa_plus.value == pytest.approx(2.0, abs=1e-6)
