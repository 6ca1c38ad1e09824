"""How the induced moments depend on the damping rate.

Weak drive: the numerics reproduce the second-order closed forms.
Strong damping: |Sx| falls like nu^-2 and |Sy| like nu^-3.
Weak damping: Sy vanishes linearly with nu.
"""
import math

import numpy as np

from acspin.evolution import steady_state
from acspin.operators import DriveWaveform, SystemSpec
from acspin.perturbation import perturbative_averages, resonance_averages
from acspin.sweep import Grid, SweepConfig, fit_scaling_exponent, run_sweep
from acspin.thermal import ThermalParams

h0, phi, beta = 3.0, math.pi / 4, 10.0

# small amplitude, compare with the closed forms
eps = 0.01
print("omega     Sy (numeric)   A0y (formula)   rel. error")
for omega in (1.0, 2.0, 3.0, 4.5):
    spec = SystemSpec.single(h0, phi, DriveWaveform.cosine(eps, omega))
    sol = steady_state(spec, ThermalParams(beta, 0.1))
    ref = perturbative_averages(h0, phi, beta, 0.1, eps, omega)
    print(f"{omega:5.2f}  {sol.sy:14.6e}  {ref.a0y:14.6e}  {abs(sol.sy / ref.a0y - 1):.1e}")

# at resonance the ratio of the two transverse moments is -2 h0 / nu
a0x, a0y = resonance_averages(h0, phi, beta, 0.1, eps)
print("resonance A0y / A0x =", a0y / a0x, " -2 h0 / nu =", -2 * h0 / 0.1)

# full-strength drive, sweep the damping rate on a log grid
spec = SystemSpec.single(h0, phi, DriveWaveform.cosine(math.sqrt(2), 1.5))
config = SweepConfig(spec, ThermalParams(beta, 0.1), axis="nu", grid=Grid(1e-2, 1e3, 41, "log"))
result = run_sweep(config)
for comp in ("Sx", "Sy"):
    slope = fit_scaling_exponent(result, comp, (10.0, 1000.0))
    print(f"large-nu slope of |{comp}|: {slope:.3f}")

# and the weak-damping end
nu = result.column("axis")
sy = result.column("Sy_avg")
small = nu < 0.05
print("Sy / nu at the smallest rates:", np.round(sy[small] / nu[small], 4))
