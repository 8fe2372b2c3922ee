"""Dirichlet Green and Robin functions of a centered ball, boundary identities,
and Pohozaev-type consistency residuals for computed eigenpairs.

For y ≠ 0 the image point is y* = R² y/|y|², and

    G(x, y) = Φ(|x-y|) - Φ(|y| |x-y*| / R),   Φ(t) = 1/((n-2) ω_n t^{n-2}),

so H(x, y) = -Φ(|y||x-y*|/R) and φ(x) = H(x, x) = -Φ((R²-|x|²)/R).
The outward normal derivative on |x| = R is minus the Poisson kernel,
∂_ν G(x, y) = -(R²-|y|²)/(ω_n R |x-y|^n).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError
from .specfun import sphere_area


@dataclass(frozen=True)
class BallDomain:
    n: int
    R: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError("ball radius must be positive")

    @property
    def omega(self):
        return sphere_area(self.n)

    def fundamental(self, t):
        return 1.0 / ((self.n - 2) * self.omega * np.asarray(t, dtype=float) ** (self.n - 2))


def _pt(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise DomainError("point has the wrong dimension")
    return x


def regular_part(ball, x, y):
    n, R = ball.n, ball.R
    x, y = _pt(x, n), _pt(y, n)
    y2 = np.sum(y * y, axis=-1)
    q = y2 * np.sum(x * x, axis=-1) - 2.0 * R * R * np.sum(x * y, axis=-1) + R ** 4
    # |y|² |x - y*|² = |y|²|x|² - 2R² x·y + R⁴, valid also at y = 0
    return -ball.fundamental(np.sqrt(q) / R)


def green_ball(ball, x, y):
    x, y = _pt(x, ball.n), _pt(y, ball.n)
    d = np.sqrt(np.sum((x - y) ** 2, axis=-1))
    if np.any(d == 0):
        raise DomainError("Green function is singular at x = y")
    return ball.fundamental(d) + regular_part(ball, x, y)


def robin_ball(ball, x):
    x = _pt(x, ball.n)
    s = np.sum(x * x, axis=-1)
    if np.any(s >= ball.R ** 2):
        raise DomainError("Robin function needs |x| < R")
    return -ball.fundamental((ball.R ** 2 - s) / ball.R)


def robin_hessian(ball, x0, h=1e-3):
    """Central second differences of the Robin function."""
    n = ball.n
    x0 = _pt(x0, n)
    if np.linalg.norm(x0) + 2 * h * np.sqrt(2) >= ball.R:
        raise DomainError("difference stencil leaves the ball")
    E = np.eye(n) * h
    Hm = np.empty((n, n))
    f0 = robin_ball(ball, x0)
    for j in range(n):
        Hm[j, j] = (robin_ball(ball, x0 + E[j]) - 2 * f0 + robin_ball(ball, x0 - E[j])) / h ** 2
        for k in range(j + 1, n):
            v = (robin_ball(ball, x0 + E[j] + E[k]) - robin_ball(ball, x0 + E[j] - E[k])
                 - robin_ball(ball, x0 - E[j] + E[k]) + robin_ball(ball, x0 - E[j] - E[k]))
            Hm[j, k] = Hm[k, j] = v / (4 * h * h)
    return Hm


def robin_hessian_exact(ball, x0):
    """Closed-form Hessian of φ(x) = -Φ((R²-|x|²)/R), radial in |x|."""
    n, R, om = ball.n, ball.R, ball.omega
    x0 = _pt(x0, n)
    s = float(x0 @ x0)
    # φ = -c (R²-s)^{-(n-2)} with c = R^{n-2}/((n-2)ω_n), s = |x|²
    c = R ** (n - 2) / ((n - 2) * om)
    d1 = -c * (n - 2) * (R * R - s) ** (-(n - 1))
    d2 = -c * (n - 2) * (n - 1) * (R * R - s) ** (-n)
    return 2.0 * d1 * np.eye(n) + 4.0 * d2 * np.outer(x0, x0)


# -- boundary integrals -----------------------------------------------------

def _sphere_rule(n, m=128):
    """Nodes t = cos θ and weights for ∫_{S^{n-1}} f(t) dσ = ω_{n-1} ∫ f(t)(1-t²)^{(n-3)/2} dt."""
    a = (n - 3) / 2.0
    t, w = roots_jacobi(m, a, a)
    return t, w * sphere_area(n - 1)


def _poisson(ball, t, y0):
    """Poisson kernel at x = R(t, sqrt(1-t²), 0...) for y = y0 e_1."""
    R, n = ball.R, ball.n
    d2 = R * R - 2 * R * y0 * t + y0 * y0
    return (R * R - y0 * y0) / (ball.omega * R * d2 ** (n / 2.0)), d2


def gx0_integral(ball, x0, m=128):
    """∫_{∂B} (∂_ν G(x, x0))² ((x - x0)·ν) dS by axisymmetric quadrature."""
    n, R = ball.n, ball.R
    x0 = _pt(x0, n)
    y0 = float(np.linalg.norm(x0))
    if y0 >= R:
        raise DomainError("x0 must be interior")
    t, w = _sphere_rule(n, m)
    P, _ = _poisson(ball, t, y0)
    return float(R ** (n - 1) * np.sum(w * P * P * (R - y0 * t)))


def gx0_closed(ball, x0):
    return -(ball.n - 2) * float(robin_ball(ball, x0))


def gx0_mixed_integral(ball, w0, m=128):
    """Matrix I_jk = ∫_{∂B} ∂_{x_j} G(x, w) ∂_ν(∂_{w_k} G(x, w)) dS at w = w0.

    On the boundary ∇_x G = ν ∂_ν G, so the integrand is ν_j P ∂_{w_k} P with P
    the Poisson kernel.  Computed in a frame where w0 lies on the first axis.
    """
    n, R = ball.n, ball.R
    w0 = _pt(w0, n)
    y0 = float(np.linalg.norm(w0))
    if y0 >= R:
        raise DomainError("w0 must be interior")
    t, wt = _sphere_rule(n, m)
    P, d2 = _poisson(ball, t, y0)
    om = ball.omega
    # ∂_{w_k} P at w = y0 e_1, x = R(t, s e_⊥): components along e_1 and along the transverse direction
    s = np.sqrt(np.clip(1 - t * t, 0, None))
    base = (R * R - y0 * y0) * n / (om * R * d2 ** (n / 2.0 + 1))
    dP1 = -2 * y0 / (om * R * d2 ** (n / 2.0)) + base * (R * t - y0)
    dPperp = base * R * s
    a = R ** (n - 1) * np.sum(wt * t * P * dP1)
    # transverse average: ∫ ν_j ν_k-type term spreads equally over n-1 directions
    b = R ** (n - 1) * np.sum(wt * s * P * dPperp) / (n - 1)
    e1 = w0 / y0 if y0 > 0 else np.eye(n)[0]
    if y0 == 0:
        return b * np.eye(n) if n > 1 else np.array([[a]])
    proj = np.outer(e1, e1)
    return a * proj + b * (np.eye(n) - proj)


def gx0_mixed_closed(ball, w0):
    """Closed form -½ D²φ(w0) of the mixed boundary integral."""
    return -0.5 * robin_hessian_exact(ball, w0)


# -- Pohozaev residuals -----------------------------------------------------

POHOZAEV_FLOOR = 1e-300


def _relative(lhs, rhs, floor=POHOZAEV_FLOOR):
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + floor)


def pohozaev_sides_dilation(state, pair):
    """Both sides of ∫_{∂Ω}(x·ν)∂_νu ∂_νv dS = (1-λ) b(x·∇u + 2u/(q-1), v), q = p-ε.

    A pair with ℓ ≠ 0 makes both sides vanish by angular orthogonality.
    """
    from .eigen import bilinear_b
    if pair.ell != 0:
        return 0.0, 0.0
    grid = state.grid
    u = state.u.values
    v = pair.profile.values
    q = state.p - state.eps
    R = grid.R
    lhs = R * R ** (grid.n - 1) * grid.derivative_at_R(u) * grid.derivative_at_R(v)
    xi = grid.nodes * grid.derivative(u) + 2.0 * u / (q - 1.0)
    rhs = (1.0 - pair.lam) * bilinear_b(state, 0, xi, v)
    return lhs, rhs


def pohozaev_residual_dilation(state, pair, z=None):
    if z is not None and np.any(np.asarray(z, dtype=float) != 0):
        raise DomainError("only z = 0 is implemented for the centered ball")
    lhs, rhs = pohozaev_sides_dilation(state, pair)
    if lhs == 0 and rhs == 0:
        return 0.0
    return _relative(lhs, rhs)


def pohozaev_sides_translation(state, pair):
    """Both sides of ∫_{∂Ω} ∂_j u ∂_ν v dS = (1-λ) b(∂_j u, v) for an ℓ=1 pair v = f(r) x_j/r.

    The common angular factor ∫ (x_j/r)² dσ = ω_n/n cancels and is omitted.
    """
    from .eigen import bilinear_b
    if pair.ell != 1:
        raise DomainError("translation identity needs an ℓ=1 eigenpair")
    grid = state.grid
    u = state.u.values
    f = pair.profile.values
    lhs = grid.R ** (grid.n - 1) * grid.derivative_at_R(u) * grid.derivative_at_R(f)
    rhs = (1.0 - pair.lam) * bilinear_b(state, 1, grid.derivative(u), f)
    return lhs, rhs


def pohozaev_residual_translation(state, pair, j=0):
    if not 0 <= j < state.grid.n:
        raise DomainError("axis index out of range")
    lhs, rhs = pohozaev_sides_translation(state, pair)
    return _relative(lhs, rhs)


def pohozaev_groundstate(state):
    """Both sides of ∫_{∂Ω}(x·ν)(∂_νu)² dS = (n-2) ε/(p-ε) ∫|∇u|², per unit sphere area."""
    grid = state.grid
    u = state.u.values
    n, R = grid.n, grid.R
    lhs = R ** n * grid.derivative_at_R(u) ** 2
    from .grid import laplacian_mode
    A = laplacian_mode(grid, 0)
    ui = u[A.dofs]
    energy = float(ui @ A.stiffness @ ui)
    rhs = (n - 2) * state.eps / (state.p - state.eps) * energy
    return lhs, rhs
