"""Gamma-function constants of the critical Hartree problem.

Everything here is a pure function of the dimension.  Bubble integrals are
computed by adaptive radial quadrature; the closed forms that exist for some
of them are used only as test oracles.

Two families of constants are kept side by side.  The ``*_displayed`` values
follow the textbook formulas literally.  The unsuffixed values are the ones
that make the bubble identities hold for the equation actually solved,
``-Δu = (|x|^{-(n-2)} * u^p) u^{p-1}``; they differ from the displayed ones by
powers of the bubble amplitude ``c_tilde``.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericalError

QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class DimensionSpec:
    n: int

    def __post_init__(self):
        if self.n not in (3, 4, 5):
            raise DomainError(f"dimension must be 3, 4 or 5, got {self.n!r}")

    @property
    def p_exact(self):
        return Fraction(self.n + 2, self.n - 2)

    @property
    def p(self):
        return float(self.p_exact)

    @property
    def alpha(self):
        return self.n - 2

    @property
    def two_star(self):
        return 2.0 * self.n / (self.n - 2)


def as_dim(dim):
    return dim if isinstance(dim, DimensionSpec) else DimensionSpec(int(dim))


def gamma_fn(s):
    s = float(s)
    if not s > 0:
        raise DomainError(f"gamma_fn needs s > 0, got {s}")
    return float(special.gamma(s))


def sphere_area(n):
    """Area of the unit sphere in R^n."""
    if n < 2:
        raise DomainError(f"sphere_area needs n >= 2, got {n}")
    return 2.0 * np.pi ** (n / 2.0) / gamma_fn(n / 2.0)


def hls_constant(n, alpha):
    """Sharp Hardy-Littlewood-Sobolev constant C_{n,alpha} for the diagonal case."""
    if not 0 < alpha < n:
        raise DomainError(f"need 0 < alpha < n, got alpha={alpha}, n={n}")
    a = gamma_fn((n - alpha) / 2.0) * np.pi ** (alpha / 2.0) / gamma_fn(n - alpha / 2.0)
    return a * (gamma_fn(n) / gamma_fn(n / 2.0)) ** (1.0 - alpha / n)


def sobolev_constant_closed(n):
    return np.pi * n * (n - 2) * (gamma_fn(n / 2.0) / gamma_fn(n)) ** (2.0 / n)


def radial_integral(f, n, lower=0.0, upper=np.inf, rtol=QUAD_RTOL):
    """Integral of a radial function over the annulus lower < |x| < upper in R^n."""
    val, err = integrate.quad(lambda r: f(r) * r ** (n - 1), lower, upper,
                              epsabs=0.0, epsrel=rtol * 1e-2, limit=400)
    if err > rtol * max(abs(val), 1e-300):
        raise NumericalError(f"radial quadrature reached only {err:.3e}", achieved=err)
    return sphere_area(n) * val


def sobolev_constant(n):
    """S = |grad U|_2^2 / |U|_{2*}^2 for U = (1+r^2)^{-(n-2)/2}."""
    two_star = 2.0 * n / (n - 2)
    grad2 = radial_integral(lambda r: ((n - 2) * r * (1 + r * r) ** (-n / 2.0)) ** 2, n)
    u2s = radial_integral(lambda r: (1 + r * r) ** (-n), n)
    return grad2 / u2s ** (2.0 / two_star)


def bubble_amplitude(n):
    """c_tilde = [n(n-2)]^{(n-2)/4} S^{(2-n)/8} C_{n,n-2}^{(2-n)/8}."""
    S = sobolev_constant_closed(n)
    C = hls_constant(n, n - 2)
    return (n * (n - 2)) ** ((n - 2) / 4.0) * S ** ((2 - n) / 8.0) * C ** ((2 - n) / 8.0)


def half_ball_moment(n):
    """I((n-2)/2) = pi^{n/2} / Gamma(n/2 + 1), the volume of the unit ball."""
    return np.pi ** (n / 2.0) * gamma_fn(1.0) / gamma_fn((n + 2) / 2.0)


@dataclass(frozen=True)
class ConstantSet:
    n: int
    S: float
    C_hls_kernel: float
    c_tilde: float
    C_N: float
    Gamma_n: float
    Gamma_n_displayed: float
    alpha_tilde: float
    K_n: float
    K_n_consistent: float
    M_0: float
    C_HLS: float
    omega: float
    integrals: dict = field(default_factory=dict)

    def as_rows(self):
        rows = [(k, getattr(self, k)) for k in (
            "S", "C_hls_kernel", "c_tilde", "C_N", "Gamma_n", "Gamma_n_displayed",
            "alpha_tilde", "K_n", "K_n_consistent", "M_0", "C_HLS", "omega")]
        rows += sorted(self.integrals.items())
        return rows


def bubble_integrals(n, c_tilde):
    p = (n + 2.0) / (n - 2)
    W = lambda r: c_tilde * (1 + r * r) ** (-(n - 2) / 2.0)
    dW = lambda r: -c_tilde * (n - 2) * r * (1 + r * r) ** (-n / 2.0)
    gam = lambda r: (1 - r * r) * (1 + r * r) ** (-n / 2.0)
    return {
        "int_W_p": radial_integral(lambda r: W(r) ** p, n),
        "int_W_2star": radial_integral(lambda r: W(r) ** (p + 1), n),
        "int_W_pm1_gradW2": radial_integral(lambda r: W(r) ** (p - 1) * dW(r) ** 2, n),
        "int_W_pm1_gamma": radial_integral(lambda r: W(r) ** (p - 1) * gam(r), n),
        "int_W_pm1_gamma2": radial_integral(lambda r: W(r) ** (p - 1) * gam(r) ** 2, n),
    }


def constant_set(dim):
    n = as_dim(dim).n
    p = (n + 2.0) / (n - 2)
    omega = sphere_area(n)
    S = sobolev_constant(n)
    S_closed = sobolev_constant_closed(n)
    if abs(S / S_closed - 1) > 1e-9:
        raise NumericalError("Sobolev quotient disagrees with its closed form",
                             achieved=abs(S / S_closed - 1))
    C = hls_constant(n, n - 2)
    ct = bubble_amplitude(n)
    C_N = ct ** (2 * (p - 2))
    gamma_disp = half_ball_moment(n) * S ** ((2 - n) / 8.0) * C ** ((2 - n) / 8.0) \
        * (n * (n - 2)) ** ((n - 2) / 4.0)
    # K * W^p = Gamma_n W holds with Gamma_n = c_tilde^{p-1} omega / n
    gamma_true = ct ** (p - 1) * omega / n
    alpha_t = float((n * (n - 2) / np.sqrt(S)) ** ((n - 2) / 4.0) * (omega / n) * C ** ((2 - n) / 8.0))
    ints = bubble_integrals(n, ct)
    K_n = float(alpha_t * ints["int_W_p"])
    # mass of the limit profile: c_tilde * Gamma_n * int W^p
    K_cons = ct * gamma_true * ints["int_W_p"]
    M_0 = -(4.0 / (n * (n + 2)) + 1.0 / n) * gamma_disp * C_N * omega
    return ConstantSet(
        n=n, S=S, C_hls_kernel=C, c_tilde=ct, C_N=C_N, Gamma_n=gamma_true,
        Gamma_n_displayed=gamma_disp, alpha_tilde=alpha_t, K_n=K_n,
        K_n_consistent=K_cons, M_0=M_0, C_HLS=S * C ** ((2.0 - n) / (n + 2)),
        omega=omega, integrals=ints)


@dataclass(frozen=True)
class DomainDerivedConstants:
    robin_value: float
    F_n: float
    C_0: float
    nu: tuple
    F_n_consistent: float
    A_0_statement: float
    A_0_proof: float


def domain_constants(dim, robin_value, hessian, constants=None):
    n = as_dim(dim).n
    if not robin_value < 0:
        raise DomainError("Robin function must be negative inside the domain")
    hessian = np.asarray(hessian, dtype=float)
    if hessian.shape != (n, n) or not np.allclose(hessian, hessian.T, atol=1e-12):
        raise DomainError("hessian must be a symmetric n x n matrix")
    cs = constants or constant_set(n)
    p = (n + 2.0) / (n - 2)
    ints = cs.integrals
    phi = float(robin_value)
    F_n = -cs.alpha_tilde ** 2 * p * cs.C_HLS ** (-(n + 2) / 4.0) * ints["int_W_p"] ** 2 * phi
    C_0 = (-(n - 2) * cs.K_n * cs.M_0 * F_n / ((2 * p - 1) * cs.Gamma_n_displayed * cs.C_N)
           / ints["int_W_pm1_gamma2"] * phi)
    F_cons = -p * cs.c_tilde ** 2 * cs.Gamma_n * ints["int_W_p"] ** 2 * phi / ints["int_W_2star"]
    expo = (n - 1.0) / (n - 2)
    A_stmt = ((p - 2) * cs.c_tilde ** (2 * (p - 2)) / (p * F_n ** expo) * half_ball_moment(n)
              * cs.S ** ((2 - n) / 8.0) * cs.C_hls_kernel ** ((2 - n) / 8.0)
              * (n * (n - 2)) ** ((n - 2) / 4.0) * ints["int_W_p"])
    A_proof = cs.C_N * cs.Gamma_n_displayed * (p - 2) / (p * F_n ** expo) * ints["int_W_p"]
    nu = tuple(float(x) for x in np.sort(np.linalg.eigvalsh(hessian)))
    return DomainDerivedConstants(phi, float(F_n), float(C_0), nu, float(F_cons),
                                  float(A_stmt), float(A_proof))
