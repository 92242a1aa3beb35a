"""Closed-form oscillatory moments vs. brute-force quadrature.

The cost of the closed-form path is independent of the phase rate; the
reference integrator resolves every wavelength and is used only to check.

Run:  python demos/02_oscillatory_quadrature.py
"""

import time

import numpy as np

from oscfred import Polynomial, SmoothAmplitude, filon_integral, oscillatory_quad, poly_exp_moment

p = Polynomial([0.5, -1.0, 0.0, 2.0])  # 0.5 - t + 2 t^3

print("int_{-1}^{1} p(t) e^{i w t} dt")
for omega in (0.3, 5.0, 300.0, 2e4):
    t0 = time.perf_counter()
    exact = poly_exp_moment(p, -1.0, 1.0, omega)
    dt_exact = time.perf_counter() - t0
    t0 = time.perf_counter()
    ref = oscillatory_quad(lambda t: p(t) * np.exp(1j * omega * t), -1.0, 1.0, omega)
    dt_ref = time.perf_counter() - t0
    print(f"  w={omega:8.1f}: {exact:+.12e}  |diff|={abs(exact - ref):.1e}  "
          f"closed {dt_exact * 1e6:7.1f}us  brute {dt_ref * 1e3:8.2f}ms")

# Filon-type rule for a non-polynomial amplitude: boundary expansion plus
# a remainder that shrinks like omega^{-n}
u = SmoothAmplitude(np.exp, (np.exp, np.exp, np.exp))
omega = 100.0
ref = oscillatory_quad(lambda t: np.exp(t) * np.exp(1j * omega * t), 0.0, 1.0, omega)
print(f"\nFilon for e^t against e^(i {omega:.0f} t) on [0, 1]:")
for n in (1, 2, 3):
    val = filon_integral(u, 0.0, 1.0, omega, n)
    print(f"  order n={n}: |error| = {abs(val - ref):.2e}")
