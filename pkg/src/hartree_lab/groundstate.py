"""Radial ground states of -Δu = (|x|^{-(n-2)} * u^{p-ε}) u^{p-1-ε} in B_R, u = 0 on ∂B_R."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve
from scipy.optimize import minimize_scalar

from .errors import ConfigurationError, IterationError, NumericalError
from .grid import RadialField, laplacian_mode, make_radial_grid
from .greens import BallDomain, green_ball, robin_ball
from .newtonian import potential_bvp, weighted_kernel_matrix
from .specfun import as_dim, constant_set, domain_constants

EPS_MAX = 0.5
EPS_MIN_BALL = 0.02


@dataclass
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 4000
    damping: float = 0.5
    damped_steps: int = 10
    newton_switch: float = 1e-5
    newton_steps: int = 20
    quotient_slack: float = 1e-12


@dataclass(eq=False)
class GroundState:
    n: int
    eps: float
    grid: object
    u: RadialField
    sup_norm: float
    mu: float
    residual: float
    iterations: int
    quotients: list = field(default_factory=list)
    bc: str = "dirichlet"

    @property
    def p(self):
        return (self.n + 2.0) / (self.n - 2)

    @property
    def q(self):
        return self.p - self.eps


def scale_exponent(n, eps):
    return (4.0 - (n - 2) * eps) / (2.0 * (n - 2))


def concentration_scale(n, eps, sup_norm):
    """μ_ε = ‖u‖_∞^{(4-(n-2)ε)/(2(n-2))}."""
    return sup_norm ** scale_exponent(n, eps)


def estimated_scale(n, R, eps):
    """Concentration scale predicted by ε‖u‖² ≈ F for the centered ball."""
    cs = constant_set(n)
    phi = float(robin_ball(BallDomain(n, R), np.zeros(n)))
    F = domain_constants(n, phi, -np.eye(n), cs).F_n_consistent
    return concentration_scale(n, eps, np.sqrt(F / eps))


def default_grid(n, R, eps, node_count=None, grading=None, order=16):
    """Grid whose first panel has width about 0.1/μ for the predicted scale μ.

    Finer first panels only add roundoff: the pointwise operator divides by
    quadrature weights that scale like r^{n-1} h.
    """
    mu = estimated_scale(n, R, eps) if eps > 0 else 1.0
    if node_count is None:
        node_count = int(min(4096, 300 * np.sqrt(0.3 / max(eps, EPS_MIN_BALL))))
    if grading is None:
        K = max(int(np.ceil((node_count - 1) / (order - 1))), 2)
        gamma = np.clip(np.log(max(10.0 * mu * R, 1.0)) / np.log(K), 1.0, 4.0)
        grading = float(gamma - 1.0)
    return make_radial_grid(n, R, node_count, grading, order)


class _Problem:
    """Discrete operators for one (grid, ε, boundary condition)."""

    def __init__(self, n, eps, grid, bc):
        self.n, self.eps, self.grid, self.bc = n, eps, grid, bc
        self.q = (n + 2.0) / (n - 2) - eps
        self.L = laplacian_mode(grid, 0, bc)
        self.dofs = self.L.dofs
        self.chol = cho_factor(self.L.stiffness)
        self.M = grid.weights

    def full(self, x):
        u = np.zeros(self.grid.size)
        u[self.dofs] = x
        return u

    def potential(self, u):
        return potential_bvp(self.grid, 0, np.clip(u, 0.0, None) ** self.q)

    def nonlinearity(self, u):
        P = self.potential(u)
        return P * np.clip(u, 0.0, None) ** (self.q - 1), P

    def picard(self, u):
        N, _ = self.nonlinearity(u)
        return self.full(cho_solve(self.chol, (self.M * N)[self.dofs]))

    def energy(self, u):
        x = u[self.dofs]
        return float(x @ self.L.stiffness @ x)

    def hartree(self, u):
        P = self.potential(u)
        return float(self.M @ (P * np.clip(u, 0.0, None) ** self.q))

    def quotient(self, u):
        return self.energy(u) / self.hartree(u) ** (1.0 / self.q)

    def residual(self, u):
        N, _ = self.nonlinearity(u)
        r = self.L.apply(u) - N[self.dofs]
        return float(np.max(np.abs(r)) / np.max(np.abs(N)))

    def polish_origin(self, u, res, steps=3):
        """Re-solve the strong equations on the first panel, where the weak form
        weights nodes by r^{n-1} and leaves their values at roundoff accuracy."""
        m = self.grid.order - 1
        J = self.L.pointwise[:m, :m]
        for _ in range(steps):
            N, P = self.nonlinearity(u)
            r = self.L.apply(u) - N[self.dofs]
            Jl = J - np.diag((self.q - 1) * P[:m] * np.clip(u[:m], 1e-300, None) ** (self.q - 2))
            cand = u.copy()
            cand[:m] += solve(Jl, -r[:m])
            rc = self.residual(cand)
            if rc >= res:
                break
            u, res = cand, rc
        return u, res

    def rescale(self, v):
        """Multiply v by t so that the fixed-point map reproduces it: t^{2q-2} θ = 1."""
        w = self.picard(v)
        theta = float(np.max(w) / np.max(v))
        return v * theta ** (-1.0 / (2 * self.q - 2))

    def jacobian(self, u):
        return self.L.stiffness - linearized_form(self.grid, u, self.q)[np.ix_(self.dofs, self.dofs)]


def linearized_form(grid, u, q, ell=0, G=None):
    """Matrix of b(v,w) = q ∫(K_ℓ(u^{q-1}v)) u^{q-1} w + (q-1)∫(K*u^q) u^{q-2} v w on all nodes."""
    u = np.clip(u, 0.0, None)
    if G is None:
        G = weighted_kernel_matrix(grid, ell)
    a = u ** (q - 1)
    P = potential_bvp(grid, 0, u ** q)
    B = q * a[:, None] * G * a[None, :]
    B[np.diag_indices(grid.size)] += (q - 1) * grid.weights * P * u ** (q - 2)
    return 0.5 * (B + B.T)


def bubble_guess(n, grid, mu, bc):
    r = grid.nodes
    U = (1.0 + (mu * r) ** 2) ** (-(n - 2) / 2.0)
    if bc == "dirichlet":
        U = U - (1.0 + (mu * grid.R) ** 2) ** (-(n - 2) / 2.0)
    return U / np.max(U)


def presolve_scale(prob):
    """Scale of the truncated bubble minimizing the energy quotient on this grid."""
    n, grid = prob.n, prob.grid
    hi = np.log(0.2 / grid.nodes[0])
    lo = np.log(1.0 / grid.R)
    res = minimize_scalar(lambda t: prob.quotient(bubble_guess(n, grid, np.exp(t), prob.bc)),
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-4})
    return float(np.exp(res.x))


def solve_ground_state(dim, eps, grid, opts=None, bc="dirichlet", mu0=None):
    n = as_dim(dim).n
    opts = opts or SolverOptions()
    if not 0 <= eps <= EPS_MAX:
        raise ConfigurationError(f"ε must lie in [0, {EPS_MAX}]")
    if bc == "dirichlet" and eps < EPS_MIN_BALL:
        raise ConfigurationError(f"ε below {EPS_MIN_BALL} is outside the supported range on a ball")
    if grid.n != n:
        raise ConfigurationError("grid dimension does not match")
    prob = _Problem(n, eps, grid, bc)
    mu0 = presolve_scale(prob) if mu0 is None else mu0
    v = bubble_guess(n, grid, mu0, bc)
    quotients = [prob.quotient(v)]
    it = 0
    res = np.inf
    while it < opts.max_iter:
        it += 1
        w = prob.picard(v)
        w = w / np.max(w)
        beta = opts.damping if it <= opts.damped_steps else 1.0
        while True:
            cand = (1 - beta) * v + beta * w
            cand = cand / np.max(cand)
            qc = prob.quotient(cand)
            if qc <= quotients[-1] * (1 + opts.quotient_slack) or beta < 1e-3:
                break
            beta *= 0.5
        if np.min(cand[prob.dofs]) < 0:
            raise NumericalError("negative values in a Picard iterate", achieved=float(np.min(cand)))
        v = cand
        quotients.append(qc)
        u = prob.rescale(v)
        res = prob.residual(u)
        if res < max(opts.tol, opts.newton_switch):
            break
    else:
        raise IterationError("Picard iteration did not converge", achieved=res)
    for _ in range(opts.newton_steps):
        if res < opts.tol:
            break
        N, _ = prob.nonlinearity(u)
        F = prob.L.stiffness @ u[prob.dofs] - (prob.M * N)[prob.dofs]
        du = solve(prob.jacobian(u), -F, assume_a="sym")
        u = u + prob.full(du)
        res = prob.residual(u)
    if res >= opts.tol:
        u, res = prob.polish_origin(u, res)
    if res >= opts.tol:
        raise IterationError("ground state residual above tolerance", achieved=res)
    if np.min(u[prob.dofs]) <= 0:
        raise NumericalError("ground state is not positive", achieved=float(np.min(u)))
    field_u = RadialField(grid, 0, u)
    sup = float(max(np.max(u), field_u(0.0)[0]))
    return GroundState(n=n, eps=float(eps), grid=grid, u=field_u,
                       sup_norm=sup, mu=concentration_scale(n, eps, sup), residual=res,
                       iterations=it, quotients=quotients, bc=bc)


def sup_norm(state):
    """‖u‖_∞, taking the interpolated value at the origin into account."""
    return state.sup_norm


def limit_profile_scale(n):
    """Scale μ* of the sup-normalized limit bubble: c̃ μ*^{(n-2)/2} = 1."""
    return constant_set(n).c_tilde ** (-2.0 / (n - 2))


def reference_profile(n, y):
    """W[0, μ*](y) with W(0) = 1, the limit of ũ_ε(y) = u(y/μ)/‖u‖_∞."""
    mu = limit_profile_scale(n)
    return (1.0 + (mu * np.asarray(y, dtype=float)) ** 2) ** (-(n - 2) / 2.0)


def rescaled(state, y):
    M = sup_norm(state)
    mu = concentration_scale(state.n, state.eps, M)
    y = np.asarray(y, dtype=float)
    inside = y / mu <= state.grid.R
    out = np.zeros_like(y)
    out[inside] = state.u(y[inside] / mu) / M
    return out


def theorem_a_diagnostics(state, constants=None, window=5.0, samples=2001):
    n = state.n
    cs = constants or constant_set(n)
    M = sup_norm(state)
    mu = concentration_scale(n, state.eps, M)
    y = np.linspace(0.0, min(window, mu * state.grid.R), samples)
    ut = rescaled(state, y)
    W = reference_profile(n, y)
    profile_error = float(np.max(np.abs(ut - W)))
    yy = mu * state.grid.nodes[:-1]
    dom = float(max(1.0, np.max(state.u.values[:-1] / M / reference_profile(n, yy))))
    green = float("nan")
    if state.bc == "dirichlet":
        ball = BallDomain(n, state.grid.R)
        rr = np.linspace(0.5, 0.9, 9) * state.grid.R
        pts = np.zeros((len(rr), n))
        pts[:, 0] = rr
        G = green_ball(ball, pts, np.zeros(n))
        green = float(np.max(np.abs(M * state.u(rr) - cs.K_n_consistent * G)
                             / np.abs(cs.K_n_consistent * G)))
    return {
        "eps_supnorm_sq": state.eps * M * M,
        "supnorm_to_eps": M ** state.eps,
        "profile_error": profile_error,
        "domination_constant": dom,
        "green_profile_error": green,
    }

