import math

import numpy as np
import pytest

from kuo_spectra.bifurcation import (BifurcationGrid, build_vorticity_map, continue_branch,
                                     quadratic_remainder, steady_residual,
                                     validate_concentration, write_streamline_svg)
from kuo_spectra.errors import DegeneratePointError, ParameterError, ValidationError
from kuo_spectra.profile import evaluate, sinus

PI2 = math.pi ** 2
BETA = PI2 / 4
# Speed of the first harmonic at alpha = 1 from the variational spectrum.
C0 = -0.6047348121667746
GRID = BifurcationGrid(modes=12, nodes=64)


@pytest.fixture(scope="module")
def branch():
    return continue_branch(sinus(), BETA, C0, 1, [0.0, 1e-3, 2e-3, 4e-3], GRID, alpha=1.0)


def test_couette_map_example(couette_profile):
    f = build_vorticity_map(couette_profile, 1.0, -2.0)
    assert float(f(np.asarray(0.0))) == pytest.approx(-1.0, abs=1e-12)
    ys = np.linspace(-1, 1, 41)
    assert np.allclose(f(ys ** 2 / 2 + 2 * ys), -1 + ys, atol=1e-11)


def test_derivative_identity_on_the_range(sin_profile):
    c = -1.0
    f = build_vorticity_map(sin_profile, BETA, c)
    ys = np.linspace(-1, 1, 100)
    t = f.argument(ys)
    want = (BETA - evaluate(sin_profile, ys, 2)) / (evaluate(sin_profile, ys, 0) - c)
    assert np.max(np.abs(f(t, 1) - want)) < 1e-10
    assert np.all(np.diff(t) > 0)


def test_blend_is_c2_and_compactly_supported(sin_profile):
    f = build_vorticity_map(sin_profile, BETA, -1.0)
    lo, hi = f.interval
    m = f.margin
    for edge, sgn in ((hi, 1), (lo, -1)):
        for order in (0, 1, 2):
            inside = float(f(np.asarray(edge - sgn * 1e-9), order))
            outside = float(f(np.asarray(edge + sgn * 1e-9), order))
            assert outside == pytest.approx(inside, abs=1e-5 * max(1, abs(inside)))
        assert float(f(np.asarray(edge + sgn * 1.01 * m))) == 0.0


def test_map_needs_speed_below_range(sin_profile):
    with pytest.raises(ParameterError):
        build_vorticity_map(sin_profile, BETA, 0.2)


def test_trivial_state(branch):
    s = branch[0]
    assert s.gamma == 0 and s.residual_l2 == 0 and not np.any(s.phi)
    assert s.c == s.c0


def test_converged_states(branch, sin_profile):
    for s in branch[1:]:
        assert s.residual_l2 < 1e-10
        assert s.min_horizontal_excess > 0
        assert steady_residual(s, sin_profile, BETA) < 1e-8
        assert np.all(s.phi[:, 0] == 0) and np.all(s.phi[:, -1] == 0)
        assert abs(s.c - s.c0) <= 10 * s.gamma


def test_remainder_is_quadratic(branch):
    r = [quadratic_remainder(s) for s in branch[1:]]
    assert max(r) / min(r) < 3


def test_concentration(branch, sin_profile):
    rep = validate_concentration(branch, sin_profile, BETA)
    assert rep.monotone
    assert rep.dominant_harmonics == [1, 1, 1]
    assert rep.minimal_periods == pytest.approx([2 * math.pi] * 3)
    with pytest.raises(ParameterError):
        validate_concentration(branch[:2], sin_profile, BETA)


def test_concentration_rejects_growing_distances(branch, sin_profile):
    s = branch[1]
    noisy = [type(s)(s.phi + 1e-3 * (k + 1) * np.roll(s.phi, 1, axis=0) * (k == 2), s.y, s.c,
                     g, s.residual_l2, s.min_horizontal_excess, s.alpha, s.k_star, s.c0, s.mode)
             for k, g in enumerate((1e-3, 2e-3, 4e-3))]
    with pytest.raises(ValidationError):
        validate_concentration(noisy[::-1], sin_profile, BETA)


def test_bad_branch_requests(sin_profile):
    with pytest.raises(ParameterError):
        continue_branch(sin_profile, BETA, C0, 0, [1e-3], GRID, alpha=1.0)
    with pytest.raises(ParameterError):
        continue_branch(sin_profile, BETA, C0, 1, [1e-3], GRID, alpha=-1.0)


def test_degenerate_point(sin_profile, monkeypatch):
    import kuo_spectra.bifurcation as bif
    monkeypatch.setattr(bif, "transversality", lambda disc, c0, k: 0.0)
    with pytest.raises(DegeneratePointError):
        continue_branch(sin_profile, BETA, C0, 1, [1e-3], GRID, alpha=1.0)


def test_state_export(branch, tmp_path, sin_profile):
    s = branch[2]
    js = s.to_json()
    assert js["k_star"] == 1 and len(js["cos_coefficients"]) == GRID.modes
    path = tmp_path / "s.svg"
    write_streamline_svg(path, s, sin_profile, BETA)
    text = path.read_text()
    assert "<svg" in text and "<image" in text
