"""Spectrum of the linearization around the bubble on a large ball.

The first eigenvalue should sit at 1/(2p-1), and the translation (ℓ=1) and
dilation (second ℓ=0) modes should sit at 1.

    python3 demos/limit_spectrum.py
"""
from hartree_lab.eigen import limit_spectrum
from hartree_lab.grid import make_radial_grid

for n in (3, 4, 5):
    p = (n + 2) / (n - 2)
    grid = make_radial_grid(n, 60.0, 3000, grading=0.3)
    spec = limit_spectrum(n, grid)
    radial = spec.of_mode(0)
    print(f"n={n}  lambda_1={radial[0].lam:.6f} (1/(2p-1)={1 / (2 * p - 1):.6f})"
          f"  ell=1: {spec.of_mode(1)[0].lam:.6f}  second ell=0: {radial[1].lam:.6f}")
