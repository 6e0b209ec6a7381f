import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kuo_spectra.errors import ParameterError
from kuo_spectra.extended import ExtendedReal
from kuo_spectra.sinus_oracle import (BETA_PLUS, REGIONS, expected_spectrum_count,
                                      lambda_at_0, lambda_at_1, lambda_beta_closed, limit_at_1,
                                      r_of, region_classify, region_lattice, theta_formula,
                                      write_region_csv, write_region_svg)

PI2 = math.pi ** 2
BETA_L = -0.41224 * PI2


def smooth_hook(beta):
    # Stand-in for the numeric Lambda_beta: same closed form continued inward.
    return (1 - r_of(beta) ** 2) * PI2


def test_lambda_at_0_examples():
    assert r_of(PI2 / 2) == pytest.approx(0.5)
    assert lambda_at_0(PI2 / 2, 1) == pytest.approx(-0.75 * PI2)
    assert lambda_at_0(PI2 / 2, 2) == pytest.approx(0.0, abs=1e-14)
    assert lambda_at_0(9 * PI2 / 16, 3) == pytest.approx(9 * PI2 / 16)
    with pytest.raises(ParameterError):
        lambda_at_0(0.6 * PI2, 1)


def test_lambda_at_1_examples():
    assert lambda_at_1(-PI2 / 2, 1) == pytest.approx(-0.75 * PI2)
    assert lambda_at_1(-PI2 / 2, 2) == 0.0
    a, b = lambda_at_1(-0.55 * PI2, 1), lambda_at_1(-0.55 * PI2, 2)
    assert a == b and a < 0
    with pytest.raises(ParameterError):
        lambda_at_1(0.1, 1)


def test_index_shift_below_minus_half():
    assert limit_at_1(-0.55 * PI2, 1) is None
    assert limit_at_1(-0.55 * PI2, 2) == lambda_at_1(-0.55 * PI2, 1)
    assert limit_at_1(-0.45 * PI2, 1) == lambda_at_1(-0.45 * PI2, 1)


@given(st.floats(1e-6, 9 / 16), st.integers(1, 6))
def test_limits_increase_with_n(b, n):
    beta = b * PI2
    assert lambda_at_0(beta, n) < lambda_at_0(beta, n + 1)
    assert lambda_at_1(-beta, n) <= lambda_at_1(-beta, n + 1)


def test_region_examples():
    assert region_classify(0.3, -0.7 * PI2) == "I"
    assert region_classify(5.0, 0.6 * PI2) == "VIII"
    assert region_classify(2.0, -PI2 / 2) == "III"
    assert region_classify(3.0, -PI2 / 2) == "IX"


def test_counts():
    assert expected_spectrum_count("IX").value == 0
    assert expected_spectrum_count("II").value == 3
    assert expected_spectrum_count("Gamma").value == 1
    assert expected_spectrum_count("I") == ExtendedReal.pos_inf()
    assert {expected_spectrum_count(r).value for r in ("III", "VII")} == {1}
    assert {expected_spectrum_count(r).value for r in ("IV", "V", "VI")} == {2}
    with pytest.raises(ParameterError):
        expected_spectrum_count("X")


def test_gamma_boundary_is_explicit():
    beta = -0.45 * PI2
    s = math.sqrt(smooth_hook(beta))
    assert region_classify(s, beta, smooth_hook, BETA_L) == "Gamma"
    assert region_classify(s * 0.99, beta, smooth_hook, BETA_L) == "IV"
    assert region_classify(s * 1.01, beta, smooth_hook, BETA_L) == "IX"


def test_theta_examples():
    assert theta_formula(1.0, -PI2 / 2).value == 2
    assert theta_formula(0.7, 0.5 * BETA_L, beta_l_hook=BETA_L).value == 0
    assert theta_formula(1.0, 0.6 * PI2).kind == "infinite"
    with pytest.raises(ParameterError):
        theta_formula(1.0, 0.0)


def test_theta_bounds_in_region_six():
    beta = 0.55 * PI2
    alpha = 0.2
    assert region_classify(alpha, beta) == "VI"
    t = theta_formula(alpha, beta)
    r = r_of(beta)
    lower = math.ceil(math.pi * math.sqrt(1 - r * r) / alpha) - 1
    upper = lower + math.ceil(math.pi * math.sqrt(-r * r - r + 0.75) / alpha) - 1
    assert t.kind == "bounds" and (t.lower, t.upper) == (lower, upper)


def test_closed_lambda_beta():
    assert lambda_beta_closed(-PI2 / 2).value == pytest.approx(0.75 * PI2)
    assert not lambda_beta_closed(0.7 * PI2).is_finite
    assert lambda_beta_closed(-0.45 * PI2) is None


# Allowed label sequences along increasing alpha in one beta column.
ORDER = {"II": 0, "III": 1, "IV": 0, "Gamma": 1, "VI": 0, "VII": 1, "V": 2, "IX": 3}


def test_lattice_partition(tmp_path):
    alphas = np.linspace(0.02, 6.0, 200)
    betas = np.linspace(-0.99 * PI2, 0.99 * PI2, 200)
    rows = region_lattice(alphas, betas, smooth_hook, BETA_L)
    assert len(rows) == 200 * 200
    assert all(row[2] in REGIONS for row in rows)
    labels = np.array([row[2] for row in rows]).reshape(200, 200)
    for j, beta in enumerate(betas):
        col = labels[j]
        if abs(beta) > BETA_PLUS:
            assert len(set(col)) == 1
            continue
        ranks = [ORDER[x] for x in col]
        assert ranks == sorted(ranks), (beta, list(dict.fromkeys(col)))
    csv_path = tmp_path / "regions.csv"
    write_region_csv(csv_path, rows)
    assert csv_path.read_text().splitlines()[0] == "alpha,beta,region,expected_count"
    svg_path = tmp_path / "regions.svg"
    write_region_svg(svg_path, rows)
    assert svg_path.read_text().lstrip().startswith("<?xml")
