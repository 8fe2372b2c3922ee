"""Spectrum of the linearized Hartree operator, one spherical-harmonic mode at a time.

For v = f(r) Y_ℓ the problem -Δv = λ 𝒢_ε[v] becomes the pencil A f = λ B f
with A the mode-ℓ stiffness and B the matrix of

    b(v, w) = q ∫ K_ℓ(u^{q-1} v) u^{q-1} w + (q-1) ∫ (K * u^q) u^{q-2} v w,   q = p - ε.

An eigenvalue below 1 is a negative direction of -Δ - 𝒢_ε, so the Morse
index is the number of eigenvalues below 1 counted with multiplicity.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.linalg import eigh, lu_factor, lu_solve

from .errors import AssemblyError, ConfigurationError, DomainError, NumericalError
from .grid import RadialField, RadialGrid, laplacian_mode
from .groundstate import linearized_form
from .newtonian import weighted_kernel_matrix
from .specfun import as_dim, constant_set

AMBIGUITY_BAND = 1e-10


def harmonic_multiplicity(n, ell):
    """Dimension of the degree-ℓ spherical harmonics on S^{n-1}."""
    if ell < 2:
        return 1 if ell == 0 else n
    return comb(ell + n - 1, n - 1) - comb(ell + n - 3, n - 1)


@dataclass(eq=False)
class EigenPair:
    lam: float
    ell: int
    multiplicity: int
    profile: RadialField
    global_index: int = 0

    @property
    def values(self):
        return self.profile.values


@dataclass(eq=False)
class Spectrum:
    pairs: list
    eps: float
    state: object = None
    flags: list = field(default_factory=list)

    @property
    def lambdas(self):
        """Eigenvalues with multiplicity expanded, ascending."""
        return np.array([p.lam for p in self.pairs for _ in range(p.multiplicity)])

    def expanded(self):
        return [p for p in self.pairs for _ in range(p.multiplicity)]

    def pair_at(self, i):
        """Pair carrying the i-th eigenvalue (1-based, multiplicity expanded)."""
        return self.expanded()[i - 1]

    def of_mode(self, ell):
        return [p for p in self.pairs if p.ell == ell]


def assemble_forms(state, ell):
    """Stiffness operator and symmetric B matrix on the free nodes of mode ℓ."""
    grid = state.grid
    A = laplacian_mode(grid, ell, state.bc)
    q = state.q if hasattr(state, "q") else state.p - state.eps
    B = linearized_form(grid, state.u.values, q, ell, weighted_kernel_matrix(grid, ell))
    kf = getattr(state, "kernel_factor", 1.0)
    B = kf * B[np.ix_(A.dofs, A.dofs)]
    if np.min(np.diag(B)) < 0:
        raise AssemblyError("B has a negative diagonal entry")
    return A, B


def bilinear_b(state, ell, f, g):
    """b(f Y, g Y) for nodal radial factors f, g on the full grid (angular factor excluded)."""
    grid = state.grid
    B = linearized_form(grid, state.u.values, state.p - state.eps, ell,
                        weighted_kernel_matrix(grid, ell))
    return float(np.asarray(f) @ B @ np.asarray(g))


def solve_spectrum(A, B, k, refine=True):
    """k smallest eigenvalues of A v = λ B v.

    The reduction factors A (the stiffness is well conditioned where B, which
    decays with u, may be numerically semidefinite) and solves B v = σ A v for
    the k largest σ = 1/λ.  Eigenvectors come back B-normalized.
    """
    Am = A.stiffness if hasattr(A, "stiffness") else np.asarray(A, dtype=float)
    Bm = np.asarray(B, dtype=float)
    m = Am.shape[0]
    if Bm.shape != (m, m) or not 0 < k <= m:
        raise ConfigurationError("pencil shapes or k are inconsistent")
    try:
        sig, V = eigh(Bm, Am, subset_by_index=[m - k, m - 1])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"pencil factorization failed: {exc}") from exc
    if np.any(sig <= 0):
        raise NumericalError("pencil has a nonpositive B-direction among the requested ones")
    order = np.argsort(-sig)
    lam = 1.0 / sig[order]
    V = V[:, order]
    out = []
    for j in range(k):
        v = V[:, j]
        if refine:
            v, lam[j] = _refine(Am, Bm, v, lam[j])
        v = v / np.sqrt(v @ Bm @ v)
        res = pencil_residual(Am, Bm, v, lam[j])
        if res > 1e-9:
            raise NumericalError(f"eigenpair residual {res:.2e} above 1e-9", achieved=res)
        out.append((float(lam[j]), v))
    return out


def pencil_residual(A, B, v, lam):
    """‖Av - λBv‖/‖Av‖ accumulated in extended precision."""
    Al, Bl, vl = (np.asarray(x, dtype=np.longdouble) for x in (A, B, v))
    Av = Al @ vl
    r = Av - np.longdouble(lam) * (Bl @ vl)
    return float(np.sqrt(np.sum(r * r) / np.sum(Av * Av)))


def _refine(A, B, v, lam, steps=3, target=1e-12):
    """Mixed-precision correction of an eigenpair.

    The residual is formed in extended precision and the correction solves
    the bordered system [[A - λB, Bv], [(Bv)^T, 0]] so that it stays B-orthogonal
    to v.  One LU factorization serves all steps.
    """
    m = len(v)
    v = v / np.sqrt(v @ B @ v)
    Bv = B @ v
    K = np.empty((m + 1, m + 1))
    K[:m, :m] = A - lam * B
    K[:m, m] = Bv
    K[m, :m] = Bv
    K[m, m] = 0.0
    lu = lu_factor(K)
    Al, Bl = A.astype(np.longdouble), B.astype(np.longdouble)
    for _ in range(steps):
        vl = v.astype(np.longdouble)
        lam_l = (vl @ Al @ vl) / (vl @ Bl @ vl)
        r = Al @ vl - lam_l * (Bl @ vl)
        lam = float(lam_l)
        if float(np.sqrt(np.sum(r * r) / np.sum((Al @ vl) ** 2))) < target:
            break
        d = lu_solve(lu, np.append(-r.astype(float), 0.0))
        v = v + d[:m]
    vl = v.astype(np.longdouble)
    lam = float((vl @ Al @ vl) / (vl @ Bl @ vl))
    return v, lam


def _profile(grid, dofs, vec, ell):
    f = np.zeros(grid.size)
    f[dofs] = vec
    i = np.argmax(np.abs(f))
    f = f / f[i]
    return RadialField(grid, ell, f)


def mode_pairs(state, ell, k):
    A, B = assemble_forms(state, ell)
    mult = harmonic_multiplicity(state.grid.n, ell)
    return [EigenPair(lam, ell, mult, _profile(state.grid, A.dofs, v, ell))
            for lam, v in solve_spectrum(A, B, k)]


def _merge(pairs, eps, state, need):
    pairs = sorted(pairs, key=lambda p: (p.lam, p.ell))
    idx = 1
    for p in pairs:
        p.global_index = idx
        idx += p.multiplicity
    spec = Spectrum(pairs, eps, state)
    if len(spec.lambdas) < need:
        raise ConfigurationError(f"only {len(spec.lambdas)} eigenvalues, need {need}")
    return spec


def spectrum_for(state, ell_max=2, k_per_mode=4):
    n = state.grid.n
    if ell_max < 2:
        raise ConfigurationError("ell_max must be at least 2")
    pairs = []
    for ell in range(ell_max + 1):
        pairs += mode_pairs(state, ell, k_per_mode)
    return _merge(pairs, state.eps, state, n + 3)


@dataclass(eq=False)
class _BubbleState:
    n: int
    grid: RadialGrid
    u: RadialField
    eps: float = 0.0
    bc: str = "decay"
    kernel_factor: float = 1.0

    @property
    def p(self):
        return (self.n + 2.0) / (self.n - 2)

    @property
    def q(self):
        return self.p


def bubble_state(dim, grid, kernel_factor=1.0):
    n = as_dim(dim).n
    ct = constant_set(n).c_tilde
    W = ct * (1.0 + grid.nodes ** 2) ** (-(n - 2) / 2.0)
    return _BubbleState(n, grid, RadialField(grid, 0, W), kernel_factor=kernel_factor)


def limit_spectrum(dim, grid, k_per_mode=3, modes=(0, 1), kernel_factor=1.0):
    """Spectrum of the pencil linearized at u = W[0,1], ε = 0, on a decay-condition grid.

    ``kernel_factor`` multiplies B.  The default 1 is the normalization under
    which W[0,1] itself solves the equation; C_N can be passed to reproduce the
    alternative normalization.
    """
    state = bubble_state(dim, grid, kernel_factor)
    pairs = []
    for ell in modes:
        pairs += mode_pairs(state, ell, k_per_mode)
    return _merge(pairs, 0.0, state, 1)


def rescale_eigenfunction(state, pair):
    """ṽ(y) = v(y/μ_ε): the same nodal values on the grid dilated by μ_ε."""
    mu = state.mu
    g = state.grid
    scaled = RadialGrid(n=g.n, R=g.R * mu, breaks=g.breaks * mu, order=g.order, grading=g.grading)
    return RadialField(scaled, pair.ell, pair.profile.values.copy())


def morse_index(spectrum, band=AMBIGUITY_BAND):
    lam = spectrum.lambdas
    close = np.abs(lam - 1.0) < band
    if np.any(close):
        spectrum.flags.append("eigenvalue within %.0e of 1" % band)
        raise NumericalError("Morse index ambiguous: eigenvalue within the band around 1",
                             achieved=float(np.min(np.abs(lam - 1.0))))
    return int(np.sum(lam < 1.0))


def nodal_count(pair, state=None, rel_zero=1e-12):
    if pair.ell != 0:
        raise DomainError("nodal count is defined here for radial pairs")
    grid = pair.profile.grid
    f = pair.profile.values
    if not np.any(f):
        raise DomainError("profile is identically zero")
    keep = np.abs(f) > rel_zero * np.max(np.abs(f))
    r = grid.nodes[keep]
    s = np.sign(f[keep])
    changes = np.nonzero(s[1:] != s[:-1])[0]
    regions = len(changes) + 1
    if len(changes) == 0:
        return regions, False
    h = grid.R - grid.nodes[-2]
    last = r[changes[-1] + 1]
    return regions, bool(last < grid.R - h)


def sign_regions(values):
    """Nodal regions of a sampled profile by sign-change count."""
    v = np.asarray(values, dtype=float)
    v = v[v != 0]
    return int(np.sum(np.sign(v[1:]) != np.sign(v[:-1])) + 1) if v.size else 0
