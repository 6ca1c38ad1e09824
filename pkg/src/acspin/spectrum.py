"""Frozen-field level structure.

The drive is frozen at a value ``h`` and the spectrum of ``H0 + h V`` is
studied as a function of ``h``. For the spin pair the singlet decouples and
the remaining triplet block carries all the field dependence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from .operators import SystemKind, SystemSpec, build_drive_coupling, build_static_hamiltonian

__all__ = [
    "RangeTooNarrow",
    "LevelScan",
    "TripletSinglet",
    "frozen_levels",
    "level_scan",
    "isotropic_levels",
    "triplet_singlet_split",
    "min_gap_scan",
]

SINGLET = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2)
TRIPLET_BASIS = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 1 / math.sqrt(2), 0.0],
    [0.0, 1 / math.sqrt(2), 0.0],
    [0.0, 0.0, 1.0],
])


class RangeTooNarrow(ValueError):
    """The minimum sits on the edge of the scanned range."""


@dataclass(frozen=True)
class TripletSinglet:
    """Singlet/triplet decomposition of the pair Hamiltonian.

    ``H0_triplet`` and ``V_triplet`` are the 3x3 restrictions to the basis
    ``|uu>, (|ud> + |du>)/sqrt(2), |dd>``; ``coupling_H0``/``coupling_V`` are
    the singlet-triplet matrix elements, which vanish for any exchange.
    """

    singlet: NDArray
    triplet_basis: NDArray
    H0_triplet: NDArray
    V_triplet: NDArray
    singlet_energy: float
    coupling_H0: NDArray
    coupling_V: NDArray

    def triplet_hamiltonian(self, h: float) -> NDArray:
        return self.H0_triplet + h * self.V_triplet


@dataclass
class LevelScan:
    h_values: NDArray
    levels: NDArray
    singlet_index: int | None = None

    def to_csv(self, path) -> None:
        """Write ``h, E1..En`` rows."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["h"] + [f"E{i + 1}" for i in range(self.levels.shape[1])])
            for h, row in zip(self.h_values, self.levels):
                writer.writerow([repr(float(h))] + [repr(float(e)) for e in row])


def frozen_levels(spec: SystemSpec, h: float, sector: str = "full") -> NDArray:
    """Ascending eigenvalues of ``H0 + h V``.

    ``sector="triplet"`` restricts a spin pair to its triplet block.
    """
    return level_scan(spec, np.array([h]), sector).levels[0]


def level_scan(spec: SystemSpec, h_values, sector: str = "full") -> LevelScan:
    h_values = np.sort(np.asarray(h_values, dtype=float))
    if sector == "triplet":
        if spec.kind is not SystemKind.PAIR:
            raise ValueError("the triplet sector exists only for a spin pair")
        split = triplet_singlet_split(spec)
        H0, V = split.H0_triplet, split.V_triplet
    elif sector == "full":
        H0, V = build_static_hamiltonian(spec), build_drive_coupling(spec)
    else:
        raise ValueError(f"unknown sector {sector!r}")
    levels = np.linalg.eigvalsh(H0 + h_values[:, None, None] * V)
    singlet_index = None
    if sector == "full" and spec.kind is SystemKind.PAIR:
        e_s = triplet_singlet_split(spec).singlet_energy
        hits = np.all(np.isclose(levels, e_s, atol=1e-10), axis=0)
        if hits.any():
            singlet_index = int(np.argmax(hits))
    return LevelScan(h_values, levels, singlet_index)


def isotropic_levels(J, h0, phi, h):
    """Closed-form ``(E0, E1, E2, E3)`` for isotropic exchange ``J``.

    ``E0`` is the singlet; the triplet levels are ``-J/4`` and
    ``-J/4 +- sqrt(a^2 + 4 c^2)`` with ``a = h0 + cos(phi) h`` and
    ``c = sin(phi) h / 2``.
    """
    a = h0 + math.cos(phi) * np.asarray(h)
    c = 0.5 * math.sin(phi) * np.asarray(h)
    root = np.sqrt(a**2 + 4 * c**2)
    base = -0.25 * J * np.ones_like(root)
    return 0.75 * J * np.ones_like(root), base + root, base, base - root


def triplet_singlet_split(spec: SystemSpec) -> TripletSinglet:
    if spec.kind is not SystemKind.PAIR:
        raise ValueError("singlet/triplet decomposition needs a spin pair")
    H0, V = build_static_hamiltonian(spec), build_drive_coupling(spec)
    B = TRIPLET_BASIS
    return TripletSinglet(
        singlet=SINGLET.copy(),
        triplet_basis=B.copy(),
        H0_triplet=B.T @ H0 @ B,
        V_triplet=B.T @ V @ B,
        singlet_energy=float((SINGLET @ H0 @ SINGLET).real),
        coupling_H0=SINGLET @ H0 @ B,
        coupling_V=SINGLET @ V @ B,
    )


def min_gap_scan(spec: SystemSpec, level_pair=(0, 1), h_range=(-2.0, 2.0),
                 resolution: int = 1000, sector: str | None = None) -> tuple[float, float]:
    """Frozen field ``h*`` minimising ``E_j - E_i`` and the gap there.

    A uniform scan of ``resolution`` points locates the coarse minimum, which
    is then refined by golden-section search to ``|dh| <= 1e-6``. Spin pairs
    are scanned in the triplet sector unless ``sector`` says otherwise.

    Raises
    ------
    RangeTooNarrow
        If the coarse minimum is at either end of ``h_range``.
    """
    i, j = level_pair
    if not 0 <= i < j:
        raise ValueError(f"invalid level pair {level_pair!r}")
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    if sector is None:
        sector = "triplet" if spec.kind is SystemKind.PAIR else "full"
    hs = np.linspace(h_range[0], h_range[1], resolution)
    levels = level_scan(spec, hs, sector).levels
    if j >= levels.shape[1]:
        raise ValueError(f"invalid level pair {level_pair!r}")
    gaps = levels[:, j] - levels[:, i]
    k = int(np.argmin(gaps))
    if k == 0 or k == resolution - 1:
        raise RangeTooNarrow(f"gap minimum at the range edge h = {hs[k]:g}")

    def gap(h):
        e = frozen_levels(spec, h, sector)
        return e[j] - e[i]

    try:
        res = minimize_scalar(gap, bracket=(hs[k - 1], hs[k], hs[k + 1]), method="golden",
                              options={"xtol": 1e-9})
    except ValueError:
        # flat coarse minimum: no strict bracket
        res = minimize_scalar(gap, bounds=(hs[k - 1], hs[k + 1]), method="bounded",
                              options={"xatol": 1e-9})
    h_star = float(res.x)
    return h_star, float(gap(h_star))
