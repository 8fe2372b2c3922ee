"""ε-sweep on the unit ball for n = 3: concentration, spectrum and fits.

Writes sweep.csv, fits.csv and plots/ into the directory given (default
./ball_sweep_out).

    python3 demos/ball_sweep.py [out_dir]
"""
import os
import sys

from hartree_lab.sweep import fit_asymptotics, run_sweep, write_plots

out = sys.argv[1] if len(sys.argv) > 1 else "ball_sweep_out"
os.makedirs(out, exist_ok=True)

table = run_sweep(3, 1.0)
fits = fit_asymptotics(table)
table.write_csv(os.path.join(out, "sweep.csv"))
fits.write_csv(os.path.join(out, "fits.csv"))
write_plots(table, os.path.join(out, "plots"))

print(" eps    ||u||     eps*||u||^2  lambda_1   lambda_5   morse")
for r in table.rows:
    print(f" {r.eps:<5}  {r.sup_norm:8.4f}  {r.eps_supnorm_sq:10.4f}  "
          f"{r.lambdas[0]:.6f}  {r.lambdas[4]:.6f}  {r.morse_index}")
print()
for e in fits.entries:
    print(f" {e.metric:<20} {e.estimate: .5g}  [{e.ci_low: .4g}, {e.ci_high: .4g}]  {e.flag}")
