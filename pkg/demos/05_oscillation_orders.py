"""Same wavenumber, different effect: the interpolation experiment.

The probes g_j(t) = t^2 + sin(kappa t)/kappa^(j-1) all oscillate at rate
kappa, but the amplitude scaling changes how the oscillation hits the
interpolation error: doubling kappa multiplies the error of g_1 by ~4,
of g_2 by ~2, and leaves g_3 untouched.

Run:  python demos/05_oscillation_orders.py
"""

import numpy as np

from oscfred import table1_experiment

kappas = [40, 80, 160, 320, 640]
errors = table1_experiment(kappas)

print("kappa      g1          g2          g3")
for k, row in zip(kappas, errors):
    print(f"{k:5d}  {row[0]:.3e}  {row[1]:.3e}  {row[2]:.3e}")

ratios = errors[1:] / errors[:-1]
print("\nerror growth per doubling of kappa (columns g1, g2, g3):")
print(np.round(ratios, 3))
