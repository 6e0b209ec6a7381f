import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kuo_spectra.errors import ParameterError, ProximityError, SpectrumOverflowError
from kuo_spectra.rk_eigen import eigenvalue
from kuo_spectra.shooting import (find_discrete_spectrum_shooting, integrate_rayleigh,
                                  scan_schedule, shooting_function)
from kuo_spectra.sinus_oracle import default_beta_l

PI2 = math.pi ** 2


def test_couette_without_beta_has_no_zero(couette_profile):
    r = integrate_rayleigh(couette_profile, 0.0, 1.0, -2.0)
    assert r.D == pytest.approx(-math.sinh(2.0), rel=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 3.0])
def test_far_field_is_potential_free(sin_profile, alpha):
    r = integrate_rayleigh(sin_profile, PI2 / 4, alpha, -1e6)
    exact = math.sinh(2 * alpha) / alpha
    assert r.D < 0
    assert abs(r.D) == pytest.approx(exact, rel=1e-4)


def test_vanishes_at_a_variational_eigenvalue(sin_profile):
    beta, c_star = PI2 / 4, -0.05
    lam = eigenvalue(sin_profile, beta, c_star, 1)
    assert lam < 0
    alpha = math.sqrt(-lam)
    r = integrate_rayleigh(sin_profile, beta, alpha, c_star)
    assert abs(r.D) < 1e-6
    # away from c* the boundary value is order one
    assert abs(integrate_rayleigh(sin_profile, beta, alpha, -0.5).D) > 1e-2
    roots = find_discrete_spectrum_shooting(sin_profile, beta, alpha, (-1.0, -0.01))
    assert any(abs(c - c_star) < 1e-8 for c in roots)


def test_proximity_and_preconditions(sin_profile):
    with pytest.raises(ProximityError):
        integrate_rayleigh(sin_profile, 1.0, 1.0, -1e-12)
    with pytest.raises(ParameterError):
        integrate_rayleigh(sin_profile, 1.0, 0.0, -1.0)
    with pytest.raises(ParameterError):
        integrate_rayleigh(sin_profile, 1.0, 1.0, 0.5)
    with pytest.raises(ParameterError):
        find_discrete_spectrum_shooting(sin_profile, 1.0, 1.0, (-1.0, 0.5))


def test_overflow_where_roots_accumulate(sin_profile):
    with pytest.raises(SpectrumOverflowError):
        find_discrete_spectrum_shooting(sin_profile, 0.6 * PI2, 1.0, (-1.0, 0.0), max_roots=20)


def test_overflow_by_counting(sin_profile):
    beta = PI2 / 4
    alpha = math.sqrt(-eigenvalue(sin_profile, beta, -0.05, 1))
    with pytest.raises(SpectrumOverflowError) as info:
        find_discrete_spectrum_shooting(sin_profile, beta, alpha, (-1.0, -0.01), max_roots=0)
    assert info.value.count == 1


@pytest.mark.parametrize("frac,alpha", [(0.2, 0.5), (0.6, 2.0), (1.0, 5.0)])
def test_no_roots_above_for_small_negative_beta(sin_profile, frac, alpha):
    beta = frac * default_beta_l()
    assert find_discrete_spectrum_shooting(sin_profile, beta, alpha, (1.0, 10.0)) == []


def test_couette_beta_zero_window_is_empty(couette_profile):
    assert find_discrete_spectrum_shooting(couette_profile, 0.0, 1.0, (-10.0, -1.001)) == []


def test_scan_schedule_is_geometric(sin_profile):
    cs = scan_schedule(sin_profile, "at_u_min", 1.0, points=50)
    d = -cs
    assert np.allclose(d[1:-1] / d[:-2], 0.85)
    assert d[-1] == pytest.approx(1e-10)


@settings(max_examples=10)
@given(st.floats(-0.999, -0.01))
def test_boundary_value_is_stable_under_tighter_tolerance(c):
    from kuo_spectra.profile import sinus
    p = sinus()
    a = integrate_rayleigh(p, PI2 / 4, 1.3, c)
    b = integrate_rayleigh(p, PI2 / 4, 1.3, c, rtol=1e-11)
    assert a.D == pytest.approx(b.D, rel=1e-7, abs=1e-9)


def test_sign_changes_once_between_roots(sin_profile):
    beta = 0.5 * PI2
    f = shooting_function(sin_profile, beta, 1.0)
    roots = find_discrete_spectrum_shooting(sin_profile, beta, 1.0, None)
    assert roots
    flips = 0
    for side in ("at_u_min", "at_u_max"):
        vals = np.array([f(c) for c in scan_schedule(sin_profile, side, 3.0, 120)])
        flips += int(np.sum(vals[1:] * vals[:-1] < 0))
    assert flips == len(roots)
