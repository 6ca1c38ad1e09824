"""The strong weak-damping resonance of the pair as the temperature drops."""
import math

from acspin.operators import DriveWaveform, SystemSpec
from acspin.sweep import Grid, SweepConfig, run_sweep
from acspin.thermal import ThermalParams, singlet_weight

pair = SystemSpec.pair(3.0, math.pi / 4, DriveWaveform.cosine(math.sqrt(2), 1.5), (5.0, 5.0, 0.0))

print(" beta   peak |Sy|   omega")
for beta in (1.0, 2.0, 5.0, 10.0, 20.0):
    config = SweepConfig(pair, ThermalParams(beta, 1e-3), grid=Grid(5.5, 6.1, 61))
    result = run_sweep(config)
    best = max(result.peaks, key=lambda r: abs(r.sy))
    print(f"{beta:5.1f}   {abs(best.sy):.5f}   {best.axis:.4f}")

# with isotropic exchange only the triplet responds; its thermal weight
# grows with ferromagnetic J
for J in (-2.0, 0.0, 2.0, 5.0):
    print(f"J = {J:+.0f}: triplet weight at beta = 1, h0 = 0.5 is {singlet_weight(1.0, 0.5, J):.4f}")
