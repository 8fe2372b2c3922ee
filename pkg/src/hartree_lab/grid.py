"""Graded radial meshes with high-order panel quadrature.

The interval [0, R] is split into panels with breakpoints ``R (k/K)^γ``,
``γ = 1 + grading``.  Each panel carries ``order`` Legendre-Lobatto nodes,
except the first one, which uses right-anchored Gauss-Radau nodes so that the
origin itself is never a node.  Neighbouring panels share their endpoint.

Fields are stored as nodal values of the piecewise polynomial interpolant.
The mode-ℓ Laplacian is the usual continuous-Galerkin form with the panel
quadrature as mass matrix, which is diagonal and positive.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import legendre

from .errors import ConfigurationError, DomainError

DEFAULT_ORDER = 16
MIN_NODES = 64


def _gauss(m):
    return legendre.leggauss(m)


def lobatto_nodes(q):
    inner = legendre.Legendre.basis(q - 1).deriv().roots()
    return np.concatenate(([-1.0], np.sort(inner.real), [1.0]))


def radau_right_nodes(q):
    """Gauss-Radau nodes on [-1, 1] including +1 and excluding -1."""
    c = np.zeros(q + 1)
    c[q - 1:] = 1.0
    # P_{q-1} + P_q vanishes at -1 and at the left-anchored Radau nodes
    roots = np.sort(-legendre.legroots(c).real)
    roots[-1] = 1.0
    return roots


def bary_weights(x):
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    w = 1.0 / np.prod(d, axis=1)
    return w / np.max(np.abs(w))


def lagrange_matrix(x, bw, t):
    """Values of the Lagrange basis on nodes x at points t, shape (len(t), len(x))."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    diff = t[:, None] - x[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    tmp = bw[None, :] / diff
    out = tmp / tmp.sum(axis=1, keepdims=True)
    rows = np.any(exact, axis=1)
    out[rows] = exact[rows].astype(float)
    return out


def diff_matrix(x, bw):
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    D = (bw[None, :] / bw[:, None]) / d
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


class _Reference:
    def __init__(self, x):
        self.x = x
        self.bw = bary_weights(x)
        self.D = diff_matrix(x, self.bw)
        q = len(x)
        g, gw = _gauss(q + 2)
        self.w = gw @ lagrange_matrix(x, self.bw, g)
        # cumulative integrals from -1 to each node
        Q = np.empty((q, q))
        for a, xa in enumerate(x):
            t = -1.0 + (xa + 1.0) * (g + 1.0) / 2.0
            Q[a] = (xa + 1.0) / 2.0 * (gw @ lagrange_matrix(x, self.bw, t))
        self.Q = Q


@dataclass(frozen=True, eq=False)
class RadialGrid:
    n: int
    R: float
    breaks: np.ndarray
    order: int
    grading: float

    @cached_property
    def _refs(self):
        return _Reference(radau_right_nodes(self.order)), _Reference(lobatto_nodes(self.order))

    @property
    def num_panels(self):
        return len(self.breaks) - 1

    def panel_slice(self, k):
        s = k * (self.order - 1)
        return slice(s, s + self.order)

    def panel_ref(self, k):
        return self._refs[0] if k == 0 else self._refs[1]

    @cached_property
    def nodes(self):
        r = np.empty(self.num_panels * (self.order - 1) + 1)
        for k in range(self.num_panels):
            a, b = self.breaks[k], self.breaks[k + 1]
            r[self.panel_slice(k)] = a + (b - a) * (self.panel_ref(k).x + 1.0) / 2.0
        r[-1] = self.R
        return r

    @property
    def size(self):
        return len(self.nodes)

    @cached_property
    def base_weights(self):
        """Weights for the plain integral of f over [0, R]."""
        w = np.zeros(self.size)
        for k in range(self.num_panels):
            h = (self.breaks[k + 1] - self.breaks[k]) / 2.0
            w[self.panel_slice(k)] += h * self.panel_ref(k).w
        return w

    @cached_property
    def weights(self):
        """Weights for the integral of f(r) r^{n-1} over [0, R]."""
        return self.base_weights * self.nodes ** (self.n - 1)

    def integrate(self, values):
        """Integral over the ball B_R of a radial field, including the sphere area."""
        from .specfun import sphere_area
        return sphere_area(self.n) * float(self.weights @ values)

    def panel_derivatives(self):
        for k in range(self.num_panels):
            h = (self.breaks[k + 1] - self.breaks[k]) / 2.0
            yield k, self.panel_slice(k), self.panel_ref(k).D / h

    def derivative(self, values):
        out = np.zeros(self.size)
        cnt = np.zeros(self.size)
        for _, sl, D in self.panel_derivatives():
            out[sl] += D @ values[sl]
            cnt[sl] += 1
        return out / cnt

    def derivative_at_R(self, values):
        _, sl, D = list(self.panel_derivatives())[-1]
        return float(D[-1] @ values[sl])

    @cached_property
    def cumulative_matrix(self):
        """(C g)_i = integral of g over [0, r_i] for the panel interpolant of g."""
        N = self.size
        C = np.zeros((N, N))
        prefix = np.zeros(N)
        for k in range(self.num_panels):
            sl = self.panel_slice(k)
            h = (self.breaks[k + 1] - self.breaks[k]) / 2.0
            ref = self.panel_ref(k)
            idx = np.arange(sl.start, sl.stop)
            for a in range(self.order):
                row = prefix.copy()
                row[idx] += h * ref.Q[a]
                C[idx[a]] = row
            prefix[idx] += h * ref.w
        return C

    def interpolate(self, values, r):
        """Evaluate the piecewise interpolant of nodal values at radii r in [0, R]."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r < 0) or np.any(r > self.R * (1 + 1e-12)):
            raise DomainError("interpolation radius outside [0, R]")
        k = np.clip(np.searchsorted(self.breaks, r, side="right") - 1, 0, self.num_panels - 1)
        out = np.empty_like(r)
        for kk in np.unique(k):
            m = k == kk
            a, b = self.breaks[kk], self.breaks[kk + 1]
            t = 2.0 * (r[m] - a) / (b - a) - 1.0
            ref = self.panel_ref(kk)
            out[m] = lagrange_matrix(ref.x, ref.bw, t) @ values[self.panel_slice(kk)]
        return out

    def stiffness(self, ell):
        """Matrix of a(f,g) = ∫ f'g' r^{n-1} + ℓ(ℓ+n-2)∫ f g r^{n-3} with no boundary condition."""
        N = self.size
        A = np.zeros((N, N))
        r = self.nodes
        for k, sl, D in self.panel_derivatives():
            h = (self.breaks[k + 1] - self.breaks[k]) / 2.0
            wl = h * self.panel_ref(k).w * r[sl] ** (self.n - 1)
            A[sl, sl] += D.T @ (wl[:, None] * D)
        c = ell * (ell + self.n - 2)
        if c:
            A[np.diag_indices(N)] += c * self.base_weights * r ** (self.n - 3)
        return A


def make_radial_grid(n, R, node_count, grading=0.0, order=DEFAULT_ORDER):
    if not R > 0:
        raise ConfigurationError("radius must be positive")
    if node_count < MIN_NODES:
        raise ConfigurationError(f"node_count must be at least {MIN_NODES}, got {node_count}")
    if not 0.0 <= grading <= 5.0:
        raise ConfigurationError("grading must lie in [0, 5]")
    if order < 4:
        raise ConfigurationError("panel order must be at least 4")
    K = max(int(np.ceil((node_count - 1) / (order - 1))), 2)
    t = np.linspace(0.0, 1.0, K + 1)
    breaks = R * t ** (1.0 + grading)
    breaks[-1] = R
    return RadialGrid(n=int(n), R=float(R), breaks=breaks, order=int(order), grading=float(grading))


@dataclass(frozen=True, eq=False)
class RadialField:
    grid: RadialGrid
    ell: int
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.grid.size:
            raise DomainError("field length does not match the grid")

    def __call__(self, r):
        return self.grid.interpolate(self.values, r)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Discrete -Δ restricted to f(r) Y_ℓ on the free nodes ``dofs``.

    ``stiffness`` is symmetric positive definite and ``mass`` diagonal, so the
    pointwise operator ``mass^{-1} stiffness`` is symmetric after conjugation
    by ``mass^{1/2}``.
    """

    ell: int
    bc: str
    stiffness: np.ndarray
    mass: np.ndarray
    dofs: np.ndarray
    pointwise: np.ndarray

    def symmetric(self):
        s = 1.0 / np.sqrt(self.mass)
        return s[:, None] * self.stiffness * s[None, :]

    def apply(self, values):
        """Pointwise -Δ_ℓ f at the free nodes, given f on the full grid."""
        return self.pointwise @ np.asarray(values, dtype=float)

    def eigenvalues(self):
        s = 1.0 / np.sqrt(self.mass)
        return np.linalg.eigvalsh(s[:, None] * self.stiffness * s[None, :])


def laplacian_mode(grid, ell, bc="dirichlet"):
    """Mode-ℓ operator -f'' - (n-1)f'/r + ℓ(ℓ+n-2)f/r².

    ``bc='dirichlet'`` removes the node at r=R; ``bc='decay'`` adds the exact
    exterior term for a harmonic tail r^{-(ℓ+n-2)}.  Regularity at the origin
    is natural: the weighted form forces f'(0)=0 for ℓ=0 and f(0)=0 for ℓ≥1.
    """
    if ell < 0:
        raise DomainError("mode index must be nonnegative")
    A = grid.stiffness(ell)
    N = grid.size
    if bc == "dirichlet":
        dofs = np.arange(N - 1)
    elif bc == "decay":
        dofs = np.arange(N)
        A[-1, -1] += (ell + grid.n - 2) * grid.R ** (grid.n - 2)
    else:
        raise DomainError(f"unknown boundary condition {bc!r}")
    mass = grid.weights[dofs].copy()
    P = A[dofs] / mass[:, None]
    # Near the origin mass^{-1} stiffness divides by weights ~ r^{n-1} and loses
    # digits; the first panel has no interface, so use the strong form there.
    _, sl, D = next(grid.panel_derivatives())
    r = grid.nodes[sl][:-1, None]
    first = -(D @ D)[:-1] - (grid.n - 1) / r * D[:-1]
    first[np.diag_indices(len(r))] += ell * (ell + grid.n - 2) / r[:, 0] ** 2
    P[: len(r)] = 0.0
    P[: len(r), sl] = first
    return ModeOperator(ell=ell, bc=bc, stiffness=A[np.ix_(dofs, dofs)],
                        mass=mass, dofs=dofs, pointwise=P)
