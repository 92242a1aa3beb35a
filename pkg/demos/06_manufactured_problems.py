"""Manufactured problems: pick the exact solution, get f in closed form.

Any structured exact solution (polynomial amplitudes on the carriers
e^{i tau kappa s}) yields a structured right-hand side f = y - Ky, which
the solver then has to recover.

Run:  python demos/06_manufactured_problems.py
"""

import numpy as np

from oscfred import (
    OscKernel,
    Polynomial,
    StructuredFunction,
    manufactured,
    run_galerkin,
)

kappa = 500.0
kernel = OscKernel.polynomial([[1.0, 0.25], [0.0, -0.5]], kappa)  # K(s,t) = 1 + t/4 - s t/2
y = StructuredFunction(kappa, {
    1: Polynomial([0.0, 1.0, 0.5j]),   # (s + i s^2 / 2) e^{+i kappa s}
    0: Polynomial([1.0, -0.3]),
    -1: Polynomial([0.2]),
})
problem = manufactured(kernel, y)
print("carriers of f:", [tau for tau, _ in problem.rhs.terms])

for N in (16, 32, 64):
    run = run_galerkin(problem, "opgm", N)
    print(f"N={N:3d}: e_N = {run.e_N:.3e}")

s = np.linspace(-1, 1, 5)
run = run_galerkin(problem, "opgm", 64)
print("pointwise |y_h - y|:", np.abs(run.evaluate(s) - y(s)).round(10))
