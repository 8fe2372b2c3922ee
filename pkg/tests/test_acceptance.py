"""The nine acceptance criteria at their stated tolerances.

Each test records one PASS/FAIL line; the lines are printed together in the
"acceptance criteria" section at the end of the pytest run.
"""

import time

import numpy as np
import pytest

from hartree_lab.bubble import bubble_dilation_mode, hls_identity_residual, translation_profile, wn_check
from hartree_lab.eigen import limit_spectrum, spectrum_for
from hartree_lab.greens import (
    BallDomain,
    gx0_closed,
    gx0_integral,
    gx0_mixed_closed,
    gx0_mixed_integral,
    pohozaev_residual_dilation,
    pohozaev_residual_translation,
    robin_ball,
    robin_hessian_exact,
)
from hartree_lab.grid import RadialField, make_radial_grid
from hartree_lab.groundstate import default_grid, solve_ground_state, theorem_a_diagnostics
from hartree_lab.newtonian import convolve_mode_bvp, evaluate_outside, potential_bvp, potential_kernel
from hartree_lab.specfun import constant_set, domain_constants, sphere_area
from hartree_lab.sweep import fit_asymptotics, run_sweep

from conftest import SWEEP_EPS


def test_criterion_1_identity_suite(acceptance):
    worst = {}
    factors = {}
    for n in (3, 4, 5):
        worst[f"hls{n}"] = hls_identity_residual(n, radii=(0.0, 0.5, 1.0, 3.0, 10.0))
        quad, closed, factor = wn_check(n)
        factors[n] = factor
        # the discrepancy factor is the amplitude power c̃^{p-1}
        worst[f"wn{n}"] = abs(factor / constant_set(n).c_tilde ** (4.0 / (n - 2)) - 1)
        ball = BallDomain(n, 1.0)
        for rad in (0.0, 0.3, 0.6):
            x0 = np.zeros(n)
            x0[0] = rad
            c = gx0_closed(ball, x0)
            worst[f"gx0_{n}_{rad}"] = abs(gx0_integral(ball, x0) / c - 1)
            m = gx0_mixed_closed(ball, x0)
            worst[f"gx01_{n}_{rad}"] = np.max(np.abs(gx0_mixed_integral(ball, x0) - m)) / np.max(np.abs(m))
    hls = max(v for k, v in worst.items() if k.startswith("hls"))
    surf = max(v for k, v in worst.items() if not k.startswith("hls"))
    ok = hls < 1e-6 and surf < 1e-6
    acceptance(1, "identity suite", ok,
               f"hls {hls:.1e}, surfaces/wn {surf:.1e}, wn factors "
               + " ".join(f"n{n}={f:.4f}" for n, f in factors.items()))
    assert ok


def _l2_error(grid, f, ref):
    f = f / np.sqrt(grid.integrate(f * f))
    ref = ref / np.sqrt(grid.integrate(ref * ref))
    if grid.integrate(f * ref) < 0:
        f = -f
    return float(np.sqrt(grid.integrate((f - ref) ** 2)))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_criterion_2_limit_spectrum(acceptance, n):
    t0 = time.perf_counter()
    grid = make_radial_grid(n, 60.0, 3000, grading=0.3)
    spec = limit_spectrum(n, grid, 2)
    wall = time.perf_counter() - t0
    p = (n + 2.0) / (n - 2)
    l1 = spec.of_mode(0)[0].lam
    l2_0 = spec.of_mode(0)[1].lam
    l1_1 = spec.of_mode(1)[0].lam
    r = grid.nodes
    x = np.zeros((grid.size, n))
    x[:, 0] = r
    e_tr = _l2_error(grid, spec.of_mode(1)[0].values, translation_profile(n, r))
    e_dil = _l2_error(grid, spec.of_mode(0)[1].values, bubble_dilation_mode(n, x))
    checks = [abs(l1 * (2 * p - 1) - 1) < 0.01, abs(l1_1 - 1) < 0.01, abs(l2_0 - 1) < 0.02,
              e_tr < 0.02, e_dil < 0.02, wall < 60]
    ok = all(checks)
    acceptance(2, f"limit spectrum n={n}", ok,
               f"λ1={l1:.6f} (vs {1 / (2 * p - 1):.6f}), ℓ=1: {l1_1:.6f}, ℓ=0 second: {l2_0:.6f}, "
               f"L2 err tr {e_tr:.1e} dil {e_dil:.1e}, {grid.size} nodes R=60, {wall:.0f}s")
    assert ok


def test_criterion_3_convolution_backends(acceptance, rng):
    worst = 0.0
    count = 0
    grids = {n: make_radial_grid(n, 2.0, 200, grading=0.5) for n in (3, 4, 5)}
    for i in range(50):
        n, ell = (3, 4, 5)[i % 3], i % 4
        g = grids[n]
        c = rng.normal(size=3)
        a = rng.uniform(0.3, 4.0, size=3)
        shift = rng.uniform(0, 1.0, size=3)
        rho = g.nodes ** ell * (c * np.exp(-a * (g.nodes[:, None] - shift) ** 2)).sum(1)
        b = potential_bvp(g, ell, rho)
        k = potential_kernel(g, ell, rho)
        worst = max(worst, np.max(np.abs(b - k)) / np.max(np.abs(b)))
        count += 1
    shell = 0.0
    for n in (3, 4, 5):
        a = 0.7
        g = make_radial_grid(n, a, 100)
        psi = convolve_mode_bvp(g, 0, RadialField(g, 0, np.ones(g.size)))
        om = sphere_area(n)
        exact = om * (g.nodes ** 2 / n + (a * a - g.nodes ** 2) / 2)
        shell = max(shell, np.max(np.abs(psi.values - exact) / exact))
        far = np.array([1.0, 2.5, 10.0])
        mass = om * a ** n / n
        shell = max(shell, np.max(np.abs(evaluate_outside(psi, far) * far ** (n - 2) / mass - 1)))
    ok = count == 50 and worst < 1e-8 and shell < 1e-10
    acceptance(3, "convolution backends", ok, f"{count} densities, worst {worst:.1e}, shell {shell:.1e}")
    assert ok


def test_criterion_4_ground_state(acceptance, state_n3):
    u = state_n3.u.values
    d = theorem_a_diagnostics(state_n3, window=5.0)
    fine = solve_ground_state(3, 0.1, default_grid(3, 1.0, 0.1, node_count=2 * state_n3.grid.size))
    drift = abs(fine.sup_norm / state_n3.sup_norm - 1)
    monotone = bool(np.all(np.diff(u) <= 0))
    ok = (state_n3.residual < 1e-8 and monotone and d["profile_error"] < 0.02
          and d["domination_constant"] < 2 and drift < 1e-4)
    acceptance(4, "ground state n=3 ε=0.1", ok,
               f"residual {state_n3.residual:.1e}, monotone {monotone}, profile {d['profile_error']:.4f}, "
               f"domination {d['domination_constant']:.3f}, refinement drift {drift:.1e}")
    assert ok


def test_criterion_5_theorem_a_trends(acceptance, sweep_n3):
    rows = sweep_n3.rows
    assert [r.eps for r in rows] == list(SWEEP_EPS)
    fm = np.array([r.eps_supnorm_sq for r in rows])
    last3 = fm[-3:]
    variation = last3.max() / last3.min() - 1
    fits = fit_asymptotics(sweep_n3)
    extrap = fits.F_n_extrapolation.estimate
    dev = np.abs(np.array([r.supnorm_to_eps for r in rows]) - 1)
    green = np.array([r.green_profile_error for r in rows])
    ball = BallDomain(3, 1.0)
    dc = domain_constants(3, float(robin_ball(ball, np.zeros(3))), robin_hessian_exact(ball, np.zeros(3)))
    ratios = (extrap / dc.F_n_consistent, extrap / dc.F_n)
    ok = (variation < 0.10 and extrap > 0 and bool(np.all(np.diff(dev) < 0)) and dev[-1] < 0.2
          and bool(np.all(np.diff(green) < 0)) and all(0.5 <= q <= 2 for q in ratios))
    acceptance(5, "Theorem A trends", ok,
               f"εM² last-3 variation {variation:.3f}, extrapolated {extrap:.3f} "
               f"(ratio {ratios[0]:.3f} consistent, {ratios[1]:.3f} displayed), "
               f"|M^ε-1| at 0.05 {dev[-1]:.3f}, green {green[0]:.3f}->{green[-1]:.3f}")
    assert ok


def test_criterion_6_eigenvalue_asymptotics(acceptance, sweep_n3):
    n = 3
    p = (n + 2.0) / (n - 2)
    rows = sweep_n3.rows
    eps = np.array([r.eps for r in rows])
    lam = np.array([r.lambdas for r in rows])
    l1_err = abs(lam[-1, 0] * (2 * p - 1) - 1)
    top = lam[:, n + 1]
    ratio = (top - 1) / eps
    small = ratio[-3:]
    stable = small.max() / small.min() - 1
    cluster = lam[:, 1] - 1
    slope = np.polyfit(np.log(eps), np.log(cluster), 1)[0] if np.all(cluster > 0) else np.nan
    ok = (l1_err < 0.03 and bool(np.all(top > 1)) and stable < 0.2 and bool(np.all(small > 0))
          and bool(np.all(cluster > 0)) and abs(slope - n / (n - 2)) <= 0.4)
    acceptance(6, "eigenvalue asymptotics", ok,
               f"λ1 err {l1_err:.1e}, (λ5-1)/ε {small.min():.4f}..{small.max():.4f}, "
               f"ℓ=1 exponent {slope:.3f}")
    assert ok


def test_criterion_7_morse_and_nodal(acceptance, sweep_n3):
    n = 3
    rows = sweep_n3.rows
    morse = [r.morse_index for r in rows]
    nodal = [(r.nodal_regions, r.nodal_interior) for r in rows]
    gaps = []
    for r in rows:
        lam = r.lambdas
        gaps += [lam[1] - lam[0], lam[n + 1] - lam[n], lam[n + 2] - lam[n + 1]]
    ok = all(m == 1 for m in morse) and all(x == (2, True) for x in nodal) and min(gaps) > 1e-6
    acceptance(7, "Morse index and nodal structure", ok,
               f"morse {morse}, nodal regions {[x[0] for x in nodal]}, min gap {min(gaps):.1e}")
    assert ok


def _pohozaev_triplet(state):
    spec = spectrum_for(state, 2, 4)
    v1, v2, top = spec.pair_at(1), spec.pair_at(2), spec.pair_at(5)
    assert (v1.ell, v2.ell, top.ell) == (0, 1, 0)
    return np.array([pohozaev_residual_dilation(state, v1), pohozaev_residual_dilation(state, top),
                     pohozaev_residual_translation(state, v2)])


def test_criterion_8_pohozaev(acceptance, state_n3):
    base = _pohozaev_triplet(state_n3)
    # spectral convergence reaches roundoff by ~200 nodes at order 16, so the
    # refinement ladder uses order-8 panels where the error is still visible
    ladder = []
    for nodes in (99, 141, 211, 281):
        s = solve_ground_state(3, 0.1, default_grid(3, 1.0, 0.1, node_count=nodes, order=8))
        ladder.append(_pohozaev_triplet(s))
    ladder = np.array(ladder)
    decreasing = bool(np.all(np.diff(ladder, axis=0) < 0))
    ok = bool(np.all(base < 1e-3)) and decreasing
    acceptance(8, "Pohozaev diagnostics ε=0.1", ok,
               f"dil v1 {base[0]:.1e}, dil v5 {base[1]:.1e}, tr v2 {base[2]:.1e}; "
               f"ladder tr {ladder[0, 2]:.1e}->{ladder[-1, 2]:.1e}, decreasing {decreasing}")
    assert ok


def test_criterion_9_determinism(acceptance, sweep_n3, tmp_path):
    second = run_sweep(3, 1.0, SWEEP_EPS)
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    sweep_n3.write_csv(a / "sweep.csv")
    second.write_csv(b / "sweep.csv")
    fit_asymptotics(sweep_n3).write_csv(a / "fits.csv")
    fit_asymptotics(second).write_csv(b / "fits.csv")
    same = all((a / f).read_bytes() == (b / f).read_bytes() for f in ("sweep.csv", "fits.csv"))
    acceptance(9, "determinism", same, "sweep.csv and fits.csv bit-identical across two runs")
    assert same
