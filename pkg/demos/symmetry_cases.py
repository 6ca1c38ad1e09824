"""Symmetries that force averaged components to vanish, and how to break them."""
import math

from acspin.evolution import steady_state
from acspin.operators import DriveWaveform, Harmonic, SystemSpec
from acspin.symmetry import classify, forced_zero_residuals, verify_trajectory_symmetry
from acspin.thermal import ThermalParams

cos = DriveWaveform.cosine(math.sqrt(2), 1.5)
sin = DriveWaveform(1.5, (Harmonic(1, math.sqrt(2), -math.pi / 2),))

configs = {
    "tilted, damped (working point)": (SystemSpec.single(3.0, math.pi / 4, cos),
                                       ThermalParams(10.0, 0.1)),
    "transverse, damped": (SystemSpec.single(3.0, math.pi / 2, cos), ThermalParams(10.0, 0.1)),
    "tilted, undamped": (SystemSpec.single(3.0, math.pi / 4, cos), ThermalParams(10.0, 0.0)),
    "transverse, undamped, sine": (SystemSpec.single(3.0, math.pi / 2, sin),
                                   ThermalParams(10.0, 0.0)),
}

for name, (spec, params) in configs.items():
    report = classify(spec, params)
    print(f"{name}: cases {report.cases}, forced zero {sorted(report.forced_zero)}")
    for case in report.cases:
        print(f"    {report.map_descriptions[case]}:"
              f" deviation {verify_trajectory_symmetry(spec, params, case):.1e}")
    for comp, value in forced_zero_residuals(spec, params).items():
        print(f"    |{comp}| = {value:.1e}")

# at the working point the half-period map fails at order one
spec, params = configs["tilted, damped (working point)"]
print("map violation at the working point:",
      verify_trajectory_symmetry(spec, params, 3, strict=False))

# an even harmonic spoils antiperiodicity, so the transverse drive responds again
drive = DriveWaveform(1.5, (Harmonic(1, math.sqrt(2)), Harmonic(2, 0.5)))
sol = steady_state(SystemSpec.single(3.0, math.pi / 2, drive), ThermalParams(10.0, 0.1))
print(f"with a second harmonic: Sx = {sol.sx:.2e}, Sy = {sol.sy:.2e}")
