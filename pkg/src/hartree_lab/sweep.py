"""ε-sweeps on a ball: ground state, spectrum and diagnostics per row, then fits."""

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .eigen import morse_index, nodal_count, spectrum_for
from .errors import ConfigurationError, DomainError, HartreeLabError
from .greens import (
    BallDomain,
    green_ball,
    pohozaev_groundstate,
    pohozaev_residual_dilation,
    pohozaev_residual_translation,
    robin_ball,
    robin_hessian_exact,
)
from .groundstate import EPS_MAX, EPS_MIN_BALL, default_grid, solve_ground_state, theorem_a_diagnostics
from .specfun import as_dim, constant_set, domain_constants

GREEN_PROBES = tuple(np.linspace(0.5, 0.9, 9))


@dataclass(frozen=True)
class GridPolicy:
    """Node count c·sqrt(0.3/ε), capped; grading chosen from the predicted scale when None."""

    node_scale: float = 300.0
    cap: int = 4096
    grading: float = None
    order: int = 16

    def grid_for(self, n, R, eps):
        nodes = int(min(self.cap, self.node_scale * math.sqrt(0.3 / eps)))
        return default_grid(n, R, eps, max(nodes, 64), self.grading, self.order)


@dataclass
class SweepRow:
    eps: float
    sup_norm: float = math.nan
    eps_supnorm_sq: float = math.nan
    supnorm_to_eps: float = math.nan
    lambdas: tuple = ()
    morse_index: int = -1
    nodal_regions: int = -1
    nodal_interior: bool = False
    profile_error: float = math.nan
    green_profile_error: float = math.nan
    first_eigen_green_error: float = math.nan
    pohozaev_dilation: float = math.nan
    pohozaev_translation: float = math.nan
    pohozaev_groundstate: float = math.nan
    residual: float = math.nan
    nodes: int = 0
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"


def row_columns(n):
    lam = [f"lambda_{i}" for i in range(1, n + 4)]
    return (["eps", "sup_norm", "eps_supnorm_sq", "supnorm_to_eps"] + lam
            + ["morse_index", "nodal_regions", "nodal_interior", "profile_error",
               "green_profile_error", "first_eigen_green_error", "pohozaev_dilation",
               "pohozaev_translation", "pohozaev_groundstate", "residual", "nodes", "status"])


def _fmt(x):
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class SweepTable:
    n: int
    R: float
    rows: list
    policy: GridPolicy = field(default_factory=GridPolicy)

    def records(self):
        k = self.n + 3
        for row in self.rows:
            lam = list(row.lambdas) + [math.nan] * (k - len(row.lambdas))
            yield ([row.eps, row.sup_norm, row.eps_supnorm_sq, row.supnorm_to_eps] + lam[:k]
                   + [row.morse_index, row.nodal_regions, row.nodal_interior, row.profile_error,
                      row.green_profile_error, row.first_eigen_green_error, row.pohozaev_dilation,
                      row.pohozaev_translation, row.pohozaev_groundstate, row.residual,
                      row.nodes, row.status])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(row_columns(self.n))
            for rec in self.records():
                w.writerow([_fmt(x) for x in rec])

    def column(self, name):
        i = row_columns(self.n).index(name)
        return np.array([float(rec[i]) for rec in self.records()])

    def good_rows(self):
        return [r for r in self.rows if r.ok]


def first_eigen_green_check(state, pair, constants=None, radii=GREEN_PROBES):
    """max over r of |‖u‖² v_1(r) - K G(r, 0)| / |K G(r, 0)|, radii given as fractions of R.

    K = c̃ Γ_n ∫W^p is the constant under which the rescaled bubble solves the
    equation; v_1 is sup-normalized.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0) or np.any(radii >= 1):
        raise DomainError("probe radii must lie strictly between the center and the boundary")
    cs = constants or constant_set(state.n)
    ball = BallDomain(state.n, state.grid.R)
    r = radii * ball.R
    pts = np.zeros((len(r), state.n))
    pts[:, 0] = r
    ref = cs.K_n_consistent * green_ball(ball, pts, np.zeros(state.n))
    v = pair.profile(r)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    val = state.sup_norm ** 2 * v
    return float(np.max(np.abs(val - ref) / np.abs(ref)))


def evaluate_row(n, R, eps, policy=None, ell_max=2, k_per_mode=4):
    """Run the groundstate -> eigen -> greens pipeline for one ε; errors land in ``status``."""
    policy = policy or GridPolicy()
    row = SweepRow(eps=float(eps))
    try:
        grid = policy.grid_for(n, R, eps)
        row.nodes = grid.size
        state = solve_ground_state(n, eps, grid)
        row.residual = state.residual
        row.sup_norm = state.sup_norm
        diag = theorem_a_diagnostics(state)
        row.eps_supnorm_sq = diag["eps_supnorm_sq"]
        row.supnorm_to_eps = diag["supnorm_to_eps"]
        row.profile_error = diag["profile_error"]
        row.green_profile_error = diag["green_profile_error"]
        spec = spectrum_for(state, ell_max, k_per_mode)
        row.lambdas = tuple(float(x) for x in spec.lambdas[: n + 3])
        row.morse_index = morse_index(spec)
        top = spec.pair_at(n + 2)
        if top.ell == 0:
            row.nodal_regions, row.nodal_interior = nodal_count(top)
        first = spec.pair_at(1)
        row.first_eigen_green_error = first_eigen_green_check(state, first)
        radial = [p for p in (first, top) if p.ell == 0]
        row.pohozaev_dilation = max(pohozaev_residual_dilation(state, p) for p in radial)
        row.pohozaev_translation = pohozaev_residual_translation(state, spec.of_mode(1)[0])
        lhs, rhs = pohozaev_groundstate(state)
        row.pohozaev_groundstate = abs(lhs - rhs) / (abs(lhs) + abs(rhs))
    except HartreeLabError as exc:
        row.status = f"{type(exc).__name__}: {exc}"
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        row.status = f"{type(exc).__name__}: {exc}"
    return row


def _row_task(args):
    return evaluate_row(*args)


def validate_eps_list(eps_list):
    eps = [float(e) for e in eps_list]
    if not eps:
        raise ConfigurationError("ε list is empty")
    if len(set(eps)) != len(eps):
        raise ConfigurationError("ε list contains duplicates")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigurationError("ε list must be strictly decreasing")
    if any(not EPS_MIN_BALL <= e <= EPS_MAX for e in eps):
        raise ConfigurationError(f"ε values must lie in [{EPS_MIN_BALL}, {EPS_MAX}]")
    return eps


def run_sweep(dim, R=1.0, eps_list=(0.3, 0.2, 0.14, 0.1, 0.07, 0.05), policy=None,
              workers=1, ell_max=2, k_per_mode=4):
    n = as_dim(dim).n
    eps = validate_eps_list(eps_list)
    policy = policy or GridPolicy()
    tasks = [(n, float(R), e, policy, ell_max, k_per_mode) for e in eps]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_task, tasks))
    else:
        rows = [_row_task(t) for t in tasks]
    return SweepTable(n, float(R), rows, policy)


# -- fits -------------------------------------------------------------------

@dataclass
class FitEntry:
    metric: str
    estimate: float
    ci_low: float
    ci_high: float
    reference_value: float
    flag: str = ""


@dataclass
class FitReport:
    entries: list

    def __getitem__(self, metric):
        for e in self.entries:
            if e.metric == metric:
                return e
        raise KeyError(metric)

    @property
    def lambda1_limit(self):
        return self["lambda1_limit"]

    @property
    def c0_slope(self):
        return self["c0_slope"]

    @property
    def ell1_exponent(self):
        return self["ell1_exponent"]

    @property
    def F_n_extrapolation(self):
        return self["F_n_extrapolation"]

    @property
    def H_hat_estimate(self):
        return self["H_hat_estimate"]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["metric", "estimate", "ci_low", "ci_high", "reference_value", "flag"])
            for e in self.entries:
                w.writerow([e.metric, _fmt(e.estimate), _fmt(e.ci_low), _fmt(e.ci_high),
                            _fmt(e.reference_value), e.flag])


METRICS = ("lambda1_limit", "c0_slope", "ell1_exponent", "F_n_extrapolation", "H_hat_estimate")


def _t(dof):
    """Two-sided 95% Student t quantile."""
    return float(stats.t.ppf(0.975, dof)) if dof > 0 else math.inf


def _polyfit_ci(x, y, deg, w=None):
    """Intercept and slope with 95% intervals from an ordinary (optionally weighted) fit."""
    X = np.vander(x, deg + 1, increasing=True)
    W = np.ones_like(y) if w is None else np.asarray(w, dtype=float)
    sw = np.sqrt(W)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    dof = len(x) - (deg + 1)
    r = (y - X @ coef) * sw
    s2 = float(r @ r) / dof if dof > 0 else math.nan
    cov = s2 * np.linalg.inv((X * W[:, None]).T @ X)
    half = _t(dof) * np.sqrt(np.diag(cov))
    return coef, half


def _monotone(values):
    d = np.diff(values)
    return bool(np.all(d >= 0) or np.all(d <= 0))


def _disabled(flag):
    return FitReport([FitEntry(m, math.nan, math.nan, math.nan, math.nan, flag) for m in METRICS])


def fit_asymptotics(table, constants=None):
    n = table.n
    rows = table.good_rows()
    if len(rows) < 2:
        return _disabled("disabled_single_row")
    if len(rows) < 4:
        return _disabled("disabled_fewer_than_4_rows")
    cs = constants or constant_set(n)
    ball = BallDomain(n, table.R)
    dc = domain_constants(n, float(robin_ball(ball, np.zeros(n))),
                          robin_hessian_exact(ball, np.zeros(n)), cs)
    eps = np.array([r.eps for r in rows])
    lam = np.array([r.lambdas for r in rows])
    p = (n + 2.0) / (n - 2)
    entries = []

    def warn(ok, base="extrapolated_to_eps_0"):
        return base if ok else base + ";non_monotone_data"

    # λ_1 is smooth in ε; a quadratic in ε through the data extrapolates to ε = 0
    deg = 2 if len(eps) >= 5 else 1
    coef, half = _polyfit_ci(eps, lam[:, 0], deg)
    entries.append(FitEntry("lambda1_limit", float(coef[0]), float(coef[0] - half[0]),
                            float(coef[0] + half[0]), 1.0 / (2 * p - 1), warn(_monotone(lam[:, 0]))))

    top = lam[:, n + 1] - 1.0
    x = eps
    # through the origin, weights 1/ε² so every row counts by relative error
    w = 1.0 / eps ** 2
    slope = float(np.sum(w * x * top) / np.sum(w * x * x))
    r = (top - slope * x) * np.sqrt(w)
    dof = len(x) - 1
    se = math.sqrt(float(r @ r) / dof / np.sum(w * x * x))
    flag = "sign_ok" if slope > 0 else "sign_mismatch"
    ref = -dc.C_0
    if not 0.5 <= slope / ref <= 2.0:
        flag += ";magnitude_differs_from_reference"
    if not _monotone(top):
        flag += ";non_monotone_data"
    entries.append(FitEntry("c0_slope", slope, slope - _t(dof) * se, slope + _t(dof) * se, ref, flag))

    cluster = lam[:, 1] - 1.0
    expo = n / (n - 2.0)
    if np.all(cluster > 0):
        coef, half = _polyfit_ci(np.log(eps), np.log(cluster), 1)
        flag = "" if _monotone(cluster) else "non_monotone_data"
        entries.append(FitEntry("ell1_exponent", float(coef[1]), float(coef[1] - half[1]),
                                float(coef[1] + half[1]), expo, flag))
    else:
        entries.append(FitEntry("ell1_exponent", math.nan, math.nan, math.nan, expo,
                                "nonpositive_cluster_gap"))

    fn = np.array([r.eps_supnorm_sq for r in rows])
    coef, half = _polyfit_ci(eps, fn, 1)
    flag = warn(_monotone(fn))
    if not 0.5 <= coef[0] / dc.F_n_consistent <= 2.0:
        flag += ";outside_factor_2"
    entries.append(FitEntry("F_n_extrapolation", float(coef[0]), float(coef[0] - half[0]),
                            float(coef[0] + half[0]), dc.F_n_consistent, flag))

    nu = -min(dc.nu)
    k = min(3, len(eps))
    small = np.argsort(eps)[:k]
    h = cluster[small] / (eps[small] ** expo * nu)
    hm = float(np.mean(h))
    hs = float(np.std(h, ddof=1)) / math.sqrt(k) if k > 1 else math.nan
    entries.append(FitEntry("H_hat_estimate", hm, hm - _t(k - 1) * hs, hm + _t(k - 1) * hs,
                            math.nan, "proof_scaling_eps_n_over_n_minus_2"))
    return FitReport(entries)


# -- plots ------------------------------------------------------------------

PLOTTED = ("eps_supnorm_sq", "supnorm_to_eps", "lambda_1", "profile_error",
           "green_profile_error", "first_eigen_green_error")


def write_plots(table, directory):
    """One SVG line chart per diagnostic against ε.  Returns the written paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(directory, exist_ok=True)
    matplotlib.rcParams["svg.hashsalt"] = "hartree-lab"
    eps = table.column("eps")
    cols = list(PLOTTED) + [f"lambda_{table.n + 2}"]
    paths = []
    for name in cols:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(eps, table.column(name), "o-")
        ax.set_xlabel("ε")
        ax.set_ylabel(name)
        ax.invert_xaxis()
        fig.tight_layout()
        path = os.path.join(directory, f"{name}.svg")
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths
