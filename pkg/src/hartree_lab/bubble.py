"""The bubble family W[ξ, μ] and the kernel modes of its linearization."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import make_radial_grid
from .newtonian import potential_bvp
from .specfun import as_dim, constant_set, radial_integral

DEFAULT_PROBES = (0.0, 0.5, 1.0, 3.0, 10.0)


@dataclass(frozen=True)
class BubbleParams:
    center: tuple
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError("bubble scale must be positive")


def _radius(x, center=None):
    x = np.asarray(x, dtype=float)
    if center is not None:
        x = x - np.asarray(center, dtype=float)
    return np.sqrt(np.sum(x * x, axis=-1))


def w_radial(n, r, mu=1.0, c_tilde=None):
    ct = constant_set(n).c_tilde if c_tilde is None else c_tilde
    r = np.asarray(r, dtype=float)
    return ct * (mu / (1.0 + mu * mu * r * r)) ** ((n - 2) / 2.0)


def w_eval(dim, params, x):
    n = as_dim(dim).n
    if len(params.center) != n:
        raise DomainError("bubble center has the wrong dimension")
    return w_radial(n, _radius(x, params.center), params.scale)


def gamma_profile(x, n=None):
    """(1-|x|²)/(1+|x|²)^{n/2}; a scalar x is read as a radius (then n is required)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        if n is None:
            raise DomainError("radius input needs the dimension n")
        r2 = float(x) ** 2
    else:
        n = x.shape[-1] if n is None else n
        r2 = np.sum(x * x, axis=-1)
    return (1.0 - r2) / (1.0 + r2) ** (n / 2.0)


def translation_profile(n, r):
    """Radial factor of ∂_k W[0,1]/c̃ = -(n-2) x_k/(1+|x|²)^{n/2}, i.e. -(n-2) r/(1+r²)^{n/2}."""
    r = np.asarray(r, dtype=float)
    return -(n - 2) * r / (1.0 + r * r) ** (n / 2.0)


def bubble_dilation_mode(dim, x):
    """((n-2)/2) W[0,1](x) + x·∇W[0,1](x)."""
    n = as_dim(dim).n
    r = _radius(x)
    ct = constant_set(n).c_tilde
    W = w_radial(n, r, c_tilde=ct)
    rdW = -ct * (n - 2) * r * r * (1.0 + r * r) ** (-n / 2.0)
    return (n - 2) / 2.0 * W + rdW


def bubble_potential(n, R_max=2000.0, nodes=1500, grading=3.0):
    """K * W[0,1]^p on a truncated ball, corrected by the exact potential of the cut tail.

    Returns (grid, values).  Mass outside R_max acts on |x| < R_max as the
    constant ω_n ∫_{R_max}^∞ W^p s ds (shell theorem), which is added back.
    """
    cs = constant_set(n)
    p = (n + 2.0) / (n - 2)
    grid = make_radial_grid(n, R_max, nodes, grading)
    Wp = w_radial(n, grid.nodes, c_tilde=cs.c_tilde) ** p
    psi = potential_bvp(grid, 0, Wp)
    tail = (n - 2) * radial_integral(
        lambda s: w_radial(n, s, c_tilde=cs.c_tilde) ** p * s ** (2 - n), n, lower=R_max)
    return grid, psi + tail


def hls_identity_residual(dim, radii=DEFAULT_PROBES, R_max=2000.0, nodes=1500, grading=3.0):
    """max over probe radii of |(K * W^p)(x) / (Γ_n W(x)) - 1|."""
    n = as_dim(dim).n
    radii = np.asarray(list(radii), dtype=float)
    if radii.size == 0:
        raise DomainError("probe list is empty")
    if np.any(radii < 0) or np.any(radii > 20):
        raise DomainError("probe radii must lie in [0, 20]")
    cs = constant_set(n)
    grid, psi = bubble_potential(n, R_max, nodes, grading)
    lhs = grid.interpolate(psi, radii)
    rhs = cs.Gamma_n * w_radial(n, radii, c_tilde=cs.c_tilde)
    return float(np.max(np.abs(lhs / rhs - 1.0)))


def wn_check(dim):
    """Compare ∫W^{p-1}γ by quadrature with the closed form -(n-2)ω_n/(n(n+2)).

    Returns (quadrature value, closed form, discrepancy factor).  The factor
    is c̃^{p-1}: the closed form is the integral of (1+|x|²)^{-2} γ.
    """
    cs = constant_set(dim)
    n = cs.n
    quad = cs.integrals["int_W_pm1_gamma"]
    closed = -(n - 2) * cs.omega / (n * (n + 2))
    return quad, closed, quad / closed


def ball_integral_of_w(n, R):
    """∫_{B_R} W[0,1]; grows without bound as R increases."""
    return radial_integral(lambda r: w_radial(n, r), n, upper=R)
