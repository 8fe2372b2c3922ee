"""The Newtonian-type potential f -> |x|^{-(n-2)} * f, one spherical-harmonic mode at a time.

For f = ρ(r) Y_ℓ the potential is ψ(r) Y_ℓ with

    ψ(r) = c_ℓ [ r^{-(ℓ+n-2)} ∫_0^r s^{ℓ+n-1} ρ ds + r^ℓ ∫_r^R s^{1-ℓ} ρ ds ],
    c_ℓ = (n-2) ω_n / (2ℓ+n-2),

equivalently -Δ_ℓ ψ = (n-2) ω_n ρ with the exterior decay condition
ψ'(R) + (ℓ+n-2) ψ(R) / R = 0.  The first backend solves that boundary value
problem, the second evaluates the kernel integrals directly.
"""

from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DomainError
from .grid import RadialField
from .specfun import sphere_area


def kernel_constant(n):
    return (n - 2) * sphere_area(n)


@lru_cache(maxsize=32)
def _decay_factor(grid, ell):
    A = grid.stiffness(ell)
    A[-1, -1] += (ell + grid.n - 2) * grid.R ** (grid.n - 2)
    return cho_factor(A)


def _check(grid, ell, density):
    if ell < 0:
        raise DomainError("mode index must be nonnegative")
    if isinstance(density, RadialField):
        if density.ell != ell:
            raise DomainError(f"density has mode {density.ell}, operator mode {ell}")
        return density.values
    return np.asarray(density, dtype=float)


def potential_bvp(grid, ell, rho):
    """Nodal values of the mode-ℓ potential of nodal density values rho."""
    rhs = kernel_constant(grid.n) * grid.weights * rho
    return cho_solve(_decay_factor(grid, ell), rhs)


def potential_kernel(grid, ell, rho):
    n = grid.n
    r = grid.nodes
    C = grid.cumulative_matrix
    c = kernel_constant(n) / (2 * ell + n - 2)
    inner = C @ (r ** (ell + n - 1) * rho)
    g = r ** (1 - ell) * rho
    outer = C[-1] @ g - C @ g
    return c * (r ** (-(ell + n - 2)) * inner + r ** ell * outer)


def convolve_mode_bvp(grid, ell, density):
    rho = _check(grid, ell, density)
    return RadialField(grid, ell, potential_bvp(grid, ell, rho))


def convolve_mode_kernel(grid, ell, density):
    rho = _check(grid, ell, density)
    return RadialField(grid, ell, potential_kernel(grid, ell, rho))


def weighted_kernel_matrix(grid, ell):
    """Symmetric matrix G with f^T G g = ∫ f (K_ℓ g) r^{n-1} dr for nodal f, g.

    Built from the boundary value backend: G = κ M A^{-1} M with M the radial
    quadrature weights and A the decay-condition stiffness.
    """
    M = grid.weights
    G = kernel_constant(grid.n) * M[:, None] * cho_solve(_decay_factor(grid, ell), np.diag(M))
    return 0.5 * (G + G.T)


def evaluate_outside(field, r):
    """Evaluate a potential anywhere in [0, ∞); beyond R it is the harmonic tail ψ(R)(R/r)^{ℓ+n-2}."""
    grid = field.grid
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r)
    inside = r <= grid.R
    out[inside] = field(r[inside])
    out[~inside] = field.values[-1] * (grid.R / r[~inside]) ** (field.ell + grid.n - 2)
    return out
