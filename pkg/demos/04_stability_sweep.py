"""Wavenumber sweep at fixed matrix order: accuracy and conditioning.

Once the wavenumber clears a few hundred, the enriched method keeps a
nearly uniform error and a bounded condition number while the plain
spline method degrades to O(1) error.

Run:  python demos/04_stability_sweep.py
"""

import numpy as np

from oscfred import paper_benchmark, run_galerkin

print("matrix orders fixed: enriched 198 (N=64), plain 258 (N=256)\n")
print("  kappa    e(enriched)  cond(enriched)   e(plain)    cond(plain)")
for kappa in np.geomspace(10.0, 1e4, 10):
    p = paper_benchmark(float(kappa))
    op = run_galerkin(p, "opgm", 64, compute_cond=True)
    cg = run_galerkin(p, "cgm", 256, compute_cond=True)
    print(f"{kappa:9.1f}  {op.e_N:.3e}  {op.cond:12.2f}   {cg.e_N:.3e}  {cg.cond:10.2f}")
