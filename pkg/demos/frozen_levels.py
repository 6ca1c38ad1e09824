"""Frozen-field spectrum of the exchange-coupled pair.

Freezing the drive at a value h turns H(t) into a static matrix. For the
pair the singlet never mixes with the triplet, so the whole field
dependence lives in a 3x3 block.
"""
import math

import numpy as np

from acspin.operators import DriveWaveform, SystemSpec
from acspin.spectrum import (
    frozen_levels,
    isotropic_levels,
    level_scan,
    min_gap_scan,
    triplet_singlet_split,
)

drive = DriveWaveform.cosine(math.sqrt(2), 1.5)
pair = SystemSpec.pair(3.0, math.pi / 4, drive, (5.0, 5.0, 0.0))

split = triplet_singlet_split(pair)
print("singlet energy:", split.singlet_energy)
print("largest singlet-triplet coupling:", np.abs(split.coupling_V).max())
print("levels at h = 0:", frozen_levels(pair, 0.0))

# two lowest triplet levels approach each other at negative h
h_star, gap = min_gap_scan(pair, (0, 1), (-2.0, 2.0))
print(f"closest approach {gap:.5f} at h = {h_star:.5f}")
print("triplet levels there:", frozen_levels(pair, h_star, "triplet"))

# spacing of the upper triplet pair over the drive range
hs = np.linspace(-math.sqrt(2), math.sqrt(2), 401)
levels = level_scan(pair, hs, "triplet").levels
upper = levels[:, 2] - levels[:, 1]
print(f"upper triplet spacing spans {upper.min():.3f} .. {upper.max():.3f}")

# isotropic exchange has closed-form levels
iso = SystemSpec.pair(3.0, math.pi / 4, drive, (5.0, 5.0, 5.0))
for h in (-1.0, 0.0, 1.0):
    print(h, np.sort(isotropic_levels(5.0, 3.0, math.pi / 4, h)), frozen_levels(iso, h))
h_star, gap = min_gap_scan(iso, (0, 2), (-4.0, 4.0))
print(f"isotropic outer gap {gap:.5f} = 2 h0 sin(phi) = {6 * math.sin(math.pi / 4):.5f}"
      f" at h = {h_star:.4f}")

level_scan(pair, np.linspace(-2, 2, 401)).to_csv("pair_levels.csv")
print("wrote pair_levels.csv")
