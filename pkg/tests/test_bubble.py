import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartree_lab.bubble import (
    BubbleParams,
    ball_integral_of_w,
    bubble_dilation_mode,
    gamma_profile,
    hls_identity_residual,
    translation_profile,
    w_eval,
    w_radial,
    wn_check,
)
from hartree_lab.errors import DomainError
from hartree_lab.specfun import constant_set


@pytest.mark.parametrize("n", [3, 4, 5])
def test_hls_identity(n):
    assert hls_identity_residual(n) < 1e-9


def test_hls_identity_probe_validation():
    with pytest.raises(DomainError):
        hls_identity_residual(3, radii=[])
    with pytest.raises(DomainError):
        hls_identity_residual(3, radii=[25.0])


@pytest.mark.parametrize("n,factor", [(3, 0.8462843753216345), (4, 1.2732395447351628), (5, 1.6880930927852327)])
def test_wn_discrepancy_is_amplitude_power(n, factor):
    quad, closed, f = wn_check(n)
    ct = constant_set(n).c_tilde
    assert closed == pytest.approx(-(n - 2) * constant_set(n).omega / (n * (n + 2)))
    assert f == pytest.approx(ct ** (4.0 / (n - 2)), rel=1e-10)
    assert f == pytest.approx(factor, rel=1e-9)


@given(st.floats(0.2, 5.0), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
@settings(max_examples=25, deadline=None)
def test_scaling_and_center(mu, c):
    x = np.array([0.3, -0.2, 0.7])
    val = w_eval(3, BubbleParams(tuple(c), mu), x + np.array(c))
    assert val == pytest.approx(w_radial(3, np.linalg.norm(x), mu), rel=1e-12)
    assert w_radial(3, 0.0, mu) == pytest.approx(constant_set(3).c_tilde * mu ** 0.5, rel=1e-12)


def test_translation_profile_is_derivative():
    r = np.linspace(0.1, 4, 30)
    h = 1e-6
    ct = constant_set(4).c_tilde
    fd = (w_radial(4, r + h) - w_radial(4, r - h)) / (2 * h) / ct
    assert np.allclose(translation_profile(4, r), fd, rtol=1e-7)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_dilation_mode_is_scale_derivative(n):
    x = np.zeros((20, n))
    x[:, 0] = np.linspace(0, 3, 20)
    h = 1e-6
    r = x[:, 0]
    fd = (w_radial(n, r, 1 + h) - w_radial(n, r, 1 - h)) / (2 * h)
    assert np.allclose(bubble_dilation_mode(n, x), fd, rtol=1e-7, atol=1e-10)
    # γ is the same profile up to the amplitude
    assert np.allclose(bubble_dilation_mode(n, x), (n - 2) / 2 * constant_set(n).c_tilde * gamma_profile(x), atol=1e-14)


def test_gamma_profile_scalar_radius():
    assert gamma_profile(1.0, n=3) == 0.0
    with pytest.raises(DomainError):
        gamma_profile(1.0)


def test_ball_integral_grows():
    vals = [ball_integral_of_w(3, R) for R in (10, 100, 1000)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] / vals[1] == pytest.approx(100, rel=0.05)


def test_bad_params():
    with pytest.raises(DomainError):
        BubbleParams((0, 0, 0), 0.0)
    with pytest.raises(DomainError):
        w_eval(3, BubbleParams((0, 0), 1.0), np.zeros(3))
