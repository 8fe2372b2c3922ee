"""Closed-form checks: the bubble convolution identity, the ∫W^{p-1}γ integral
and the ball surface integrals, for n = 3, 4, 5.

    python3 demos/identities.py
"""
import numpy as np

from hartree_lab.bubble import hls_identity_residual, wn_check
from hartree_lab.greens import BallDomain, gx0_closed, gx0_integral
from hartree_lab.specfun import constant_set

for n in (3, 4, 5):
    cs = constant_set(n)
    quad, closed, factor = wn_check(n)
    ball = BallDomain(n, 1.0)
    x0 = np.zeros(n)
    x0[0] = 0.4
    gx = abs(gx0_integral(ball, x0) / gx0_closed(ball, x0) - 1)
    print(f"n={n}  c~={cs.c_tilde:.6f}  Gamma_n={cs.Gamma_n:.6f}")
    print(f"  convolution identity residual  {hls_identity_residual(n):.2e}")
    print(f"  int W^(p-1) gamma              {quad:.10f}  (closed form x {factor:.4f})")
    print(f"  boundary integral at |x0|=0.4  rel. error {gx:.1e}")
