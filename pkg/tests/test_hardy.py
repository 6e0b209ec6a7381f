import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.integrate import quad

from kuo_spectra.errors import ParameterError
from kuo_spectra.hardy import (TestFunction, bump_function, check_hardy, divergence_witness,
                               log_dyadic, optimality_sweep, piecewise_linear, power_function,
                               witness_offset)
from kuo_spectra.profile import sinus
from kuo_spectra.rk_eigen import eigen_at_offset

PI2 = math.pi ** 2
BETA = 0.6 * PI2


def _bump_energy():
    # int_0^1 J'^2 = 2 int eta'^2, with eta = eta0 / ||eta0||
    e0 = lambda t: math.exp(-1 / (1 - t * t))
    d0 = lambda t: e0(t) * (-2 * t / (1 - t * t) ** 2)
    m = quad(lambda t: e0(t) ** 2, -1, 1, epsabs=0, epsrel=1e-13)[0]
    k = quad(lambda t: d0(t) ** 2, -1, 1, epsabs=0, epsrel=1e-13)[0]
    return 2 * k / m


def test_linear_example():
    tf = piecewise_linear([0.0, 1.0], [0.0, 1.0], 0.0)
    chk = check_hardy(tf)
    assert chk.lhs == pytest.approx(1.5, rel=1e-10)
    assert chk.rhs == pytest.approx(4.0, rel=1e-10)
    assert chk.holds


def test_bump_example():
    chk = check_hardy(bump_function(-1.0, 1.0, -1.0))
    assert chk.holds and chk.lhs > 0


def test_power_example():
    chk = check_hardy(power_function(0.01))
    assert chk.holds
    assert chk.weighted / chk.rhs == pytest.approx(1 / (4 * 0.51 ** 2), rel=1e-8)


def test_sweep():
    r = optimality_sweep([0.5, 0.05, 0.005])
    assert r[0] == pytest.approx(1.0, rel=1e-10)
    assert r[1] == pytest.approx(1 / 0.55 ** 2, rel=1e-8)
    assert r[2] == pytest.approx(1 / 0.505 ** 2, rel=1e-8)
    assert abs(r[2] - 4) / 4 < 0.02
    with pytest.raises(ParameterError):
        optimality_sweep([0.0])


@given(st.lists(st.floats(0.001, 0.5), min_size=2, max_size=6, unique=True))
def test_sweep_monotone_and_bounded(eps):
    eps = sorted(eps, reverse=True)
    assume(all(a - b > 1e-9 for a, b in zip(eps, eps[1:])))
    r = optimality_sweep(eps)
    assert all(a < b for a, b in zip(r, r[1:]))
    assert all(x < 4 for x in r)


def test_anchor_must_vanish():
    with pytest.raises(ParameterError):
        piecewise_linear([0.0, 1.0], [1.0, 2.0], 0.0)
    with pytest.raises(ParameterError):
        TestFunction(0.0, 1.0, 2.0, lambda y: y, lambda y: 1 + 0 * y)


@settings(max_examples=60)
@given(st.integers(2, 12), st.floats(-3, 3), st.floats(0.1, 4), st.floats(0, 1),
       st.integers(0, 2 ** 32 - 1))
def test_random_piecewise_linear(k, a, width, where, seed):
    rng = np.random.default_rng(seed)
    nodes = np.sort(a + width * np.concatenate([[0.0, 1.0], rng.uniform(0, 1, k)]))
    nodes = nodes[np.concatenate([[True], np.diff(nodes) > 1e-9 * width])]
    y0 = float(nodes[0] + where * (nodes[-1] - nodes[0]))
    values = rng.normal(size=nodes.size)
    values -= np.interp(y0, nodes, values)
    chk = check_hardy(piecewise_linear(nodes, values, y0))
    assert chk.holds


def test_witness_energies_match_leading_order():
    kinetic = _bump_energy()
    assert kinetic == pytest.approx(6.155218262463553, rel=1e-9)
    p = sinus()
    for R in (5.0, 8.0, 12.0):
        # with n = 2 the speed sits e^{-6R} from the edge, far below s^2 on
        # the support of phi_{1,R}, so V s^2 -> 2 (u''(0) - beta)/u''(0) = -0.4
        w = divergence_witness(p, BETA, 2, R)
        # the curvature of u enters at relative order s^2 <= e^{-2R}
        assert w.energies[0] == pytest.approx(R * (0.25 - 0.4) / 2 + kinetic / R,
                                              abs=math.exp(-2 * R) + 1e-10)


def test_witness_energies_decrease_on_the_example_schedule():
    p = sinus()
    ws = [divergence_witness(p, BETA, 2, R) for R in (5.0, 8.0, 12.0)]
    for i in range(2):
        e = [w.energies[i] for w in ws]
        assert e[0] > e[1] > e[2]


def test_witness_quotients_decrease_once_negative():
    p = sinus()
    ws = [divergence_witness(p, BETA, 2, R) for R in (10.0, 12.0, 14.0)]
    for i in range(2):
        v = [w.values[i] for w in ws]
        assert v[0] > v[1] > v[2]
        assert v[0] < 0


def test_witness_single_branch_drop():
    p = sinus()
    v5 = divergence_witness(p, BETA, 1, 5.0).values[0]
    v10 = divergence_witness(p, BETA, 1, 10.0).values[0]
    assert v10 < v5 - 1


def test_witness_supports_are_disjoint():
    f1, f2 = log_dyadic(1, 6.0), log_dyadic(2, 6.0)
    assert f2.breaks[1] <= f1.breaks[0]
    ys = np.geomspace(1e-9, 1.0, 20001)
    assert np.max(np.abs(f1(ys) * f2(ys))) == 0.0


def test_witness_bounds_the_eigenvalue():
    p = sinus()
    w = divergence_witness(p, BETA, 1, 10.0)
    lam = eigen_at_offset(p, BETA, witness_offset(w), 1, vectors=False)[0].lambda_
    assert lam <= max(w.values)


def test_witness_preconditions():
    p = sinus()
    with pytest.raises(ParameterError):
        divergence_witness(p, 0.5 * PI2, 1, 10.0)
    with pytest.raises(ParameterError):
        divergence_witness(p, BETA, 1, 0.5)
    w = divergence_witness(p, BETA, 1, 10.0)
    js = w.to_json()
    assert js["quadratic_form_values"] == w.values
    assert 0 < w.delta and 0 < w.eps0 < 4 and w.nu0 > 0
