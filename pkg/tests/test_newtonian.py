import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartree_lab.errors import DomainError
from hartree_lab.grid import RadialField, make_radial_grid
from hartree_lab.newtonian import (
    convolve_mode_bvp,
    convolve_mode_kernel,
    evaluate_outside,
    kernel_constant,
    potential_bvp,
    potential_kernel,
    weighted_kernel_matrix,
)
from hartree_lab.specfun import sphere_area


def kernel_oracle(n, ell, R, r, rho):
    c = (n - 2) * sphere_area(n) / (2 * ell + n - 2)
    inner = mp.quad(lambda s: s ** (ell + n - 1) * rho(s), [0, r])
    outer = mp.quad(lambda s: s ** (1 - ell) * rho(s), [r, R])
    return float(c * (r ** (-(ell + n - 2)) * inner + r ** ell * outer))


@pytest.mark.parametrize("n,ell", [(3, 0), (3, 2), (4, 1), (5, 3)])
def test_potential_against_mpmath(n, ell):
    R = 2.0
    g = make_radial_grid(n, R, 200, grading=0.5)
    rho_np = lambda s: s ** ell * np.exp(-s * s)
    rho_mp = lambda s: s ** ell * mp.exp(-s * s)
    psi = RadialField(g, ell, potential_bvp(g, ell, rho_np(g.nodes)))
    for r in (0.3, 1.1, 2.0):
        assert psi(np.array([r]))[0] == pytest.approx(kernel_oracle(n, ell, R, r, rho_mp), rel=1e-10)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_shell_theorem_uniform_ball(n):
    # unit density on B_a: ψ = ω_n (r²/n + (a²-r²)/2) inside, m / r^{n-2} outside
    a = 0.7
    g = make_radial_grid(n, a, 100)
    psi = convolve_mode_bvp(g, 0, RadialField(g, 0, np.ones(g.size)))
    om = sphere_area(n)
    r = g.nodes
    exact = om * (r * r / n + (a * a - r * r) / 2)
    assert np.max(np.abs(psi.values - exact) / exact) < 1e-10
    mass = om * a ** n / n
    far = np.array([1.0, 3.0, 10.0])
    assert np.allclose(evaluate_outside(psi, far), mass / far ** (n - 2), rtol=1e-12)


def test_backends_agree_on_random_densities(rng):
    g = make_radial_grid(4, 1.5, 180, grading=1.0)
    for ell in (0, 1, 2, 3):
        for _ in range(5):
            c = rng.normal(size=3)
            a = rng.uniform(0.5, 3.0, size=3)
            rho = g.nodes ** ell * (c[None, :] * np.exp(-a[None, :] * g.nodes[:, None] ** 2)).sum(1)
            b = potential_bvp(g, ell, rho)
            k = potential_kernel(g, ell, rho)
            assert np.max(np.abs(b - k)) / np.max(np.abs(b)) < 1e-8


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=20, deadline=None)
def test_linearity(s, t):
    g = make_radial_grid(3, 1.0, 80)
    f, h = np.cos(g.nodes), g.nodes ** 2
    lhs = potential_bvp(g, 1, s * f + t * h)
    rhs = s * potential_bvp(g, 1, f) + t * potential_bvp(g, 1, h)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(lhs)))


def test_weighted_kernel_matrix_symmetric_positive():
    g = make_radial_grid(3, 1.0, 100)
    G = weighted_kernel_matrix(g, 2)
    assert np.allclose(G, G.T, atol=0)
    assert np.min(np.linalg.eigvalsh(G)) > -1e-12 * np.max(np.abs(G))
    f = np.exp(-g.nodes)
    assert f @ G @ f == pytest.approx(g.integrate(f * potential_bvp(g, 2, f)) / sphere_area(3), rel=1e-12)


def test_mode_mismatch_and_constant():
    g = make_radial_grid(3, 1.0, 80)
    assert kernel_constant(3) == pytest.approx(4 * np.pi)
    with pytest.raises(DomainError):
        convolve_mode_kernel(g, 1, RadialField(g, 0, np.ones(g.size)))
    with pytest.raises(DomainError):
        convolve_mode_bvp(g, -1, np.ones(g.size))
