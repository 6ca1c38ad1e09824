"""Symmetry classification of a driven configuration.

Three symmetries force averaged magnetisation components to vanish:

====  ===================================  ==============================  ===========
case  condition                            map                             forced zero
====  ===================================  ==============================  ===========
1     nu = 0, gamma = 0, h(-t) = -h(t)     Sx -> -Sx, t -> -t              Sx
2     nu = 0, h(-t) = h(t)                 Sy -> -Sy, t -> -t              Sy
3     nu != 0, gamma = 0, h(t+T/2) = -h(t)  Sx -> -Sx, Sy -> -Sy, t -> t+T/2  Sx, Sy
====  ===================================  ==============================  ===========

For the spin pair the same maps apply with both spins transformed together.
Detection is syntactic on the harmonic table of the drive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evolution import (
    DEFAULT_MAX_PERIODS,
    DEFAULT_STEPS_PER_PERIOD,
    default_steps_per_period,
    expectations,
    steady_state,
    trajectory,
)
from .operators import SystemSpec, build_static_hamiltonian
from .thermal import ThermalParams, gibbs_state

__all__ = [
    "CaseNotApplicable",
    "SymmetryReport",
    "classify",
    "verify_trajectory_symmetry",
    "forced_zero_residuals",
]

_ANGLE_TOL = 1e-9
_GAMMA_TOL = 1e-12

# component sign under each map, and the time map
MAPS = {
    1: ((-1, 1, 1), "t -> -t"),
    2: ((1, -1, 1), "t -> -t"),
    3: ((-1, -1, 1), "t -> t + T/2"),
}
FORCED = {1: {"Sx"}, 2: {"Sy"}, 3: {"Sx", "Sy"}}


class CaseNotApplicable(ValueError):
    pass


@dataclass
class SymmetryReport:
    case1: bool
    case2: bool
    case3: bool
    forced_zero: frozenset = frozenset()
    map_descriptions: dict = field(default_factory=dict)

    @property
    def cases(self) -> list[int]:
        return [c for c, flag in zip((1, 2, 3), (self.case1, self.case2, self.case3)) if flag]


def _angle_is(theta: float, target: float) -> bool:
    """``theta == target (mod pi)`` within tolerance."""
    r = (theta - target) % math.pi
    return min(r, math.pi - r) < _ANGLE_TOL


def drive_parity(spec: SystemSpec) -> dict[str, bool]:
    harmonics = [hm for hm in spec.drive.harmonics if hm.amplitude != 0]
    return {
        "odd": all(_angle_is(hm.phase, math.pi / 2) for hm in harmonics),
        "even": all(_angle_is(hm.phase, 0.0) for hm in harmonics),
        "antiperiodic": all(hm.n % 2 == 1 for hm in harmonics),
    }


def classify(spec: SystemSpec, params: ThermalParams) -> SymmetryReport:
    parity = drive_parity(spec)
    transverse_only = abs(spec.gamma) < _GAMMA_TOL
    undamped = params.nu == 0
    case1 = undamped and transverse_only and parity["odd"]
    case2 = undamped and parity["even"]
    case3 = (not undamped) and transverse_only and parity["antiperiodic"]
    forced: set[str] = set()
    maps = {}
    for c, flag in zip((1, 2, 3), (case1, case2, case3)):
        if flag:
            forced |= FORCED[c]
            signs, tmap = MAPS[c]
            desc = ", ".join(f"S{a} -> {'-' if s < 0 else ''}S{a}" for a, s in zip("xyz", signs))
            maps[c] = f"{desc}, {tmap}"
    return SymmetryReport(case1, case2, case3, frozenset(forced), maps)


def verify_trajectory_symmetry(spec: SystemSpec, params: ThermalParams, case_id: int,
                               horizon_periods: int = 50,
                               steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
                               strict: bool = True) -> float:
    """Largest violation of the symmetry map along a computed trajectory.

    Case 3 is checked on the periodic steady state and returns
    ``max_t |Sx(t + T/2) + Sx(t)| + |Sy(t + T/2) + Sy(t)|``. Cases 1 and 2
    (no damping) start from ``rho_beta(H0)`` at ``t = 0``, integrate
    ``horizon_periods`` forward and backward, and return the largest
    ``|S(t) + S(-t)|`` of the component the map flips.

    With ``strict=False`` the map is applied even where it does not hold,
    which measures how strongly a configuration breaks it.

    Raises
    ------
    CaseNotApplicable
        If ``strict`` and :func:`classify` does not report ``case_id``.
    """
    if case_id not in MAPS:
        raise ValueError(f"unknown symmetry case {case_id!r}")
    if strict and case_id not in classify(spec, params).cases:
        raise CaseNotApplicable(f"symmetry case {case_id} does not hold here")
    signs = np.array(MAPS[case_id][0])
    if case_id == 3:
        if params.nu <= 0:
            raise CaseNotApplicable("the half-period map is checked on the damped steady state")
        n = max(steps_per_period, default_steps_per_period(spec, params.nu))
        sol = steady_state(spec, params, steps_per_period=n + n % 2,
                           max_periods=_period_cap(spec, params))
        s = sol.series
        shifted = np.roll(s, -s.shape[0] // 2, axis=0)
        return _deviation(shifted, s, signs)
    if params.nu != 0:
        raise CaseNotApplicable("time-reversal maps are checked without damping")
    fwd, bwd = _forward_backward(spec, params, horizon_periods, steps_per_period)
    return _deviation(bwd, fwd, signs)


def _deviation(mapped, reference, signs):
    # summed over the components the map flips, maximised over time
    flipped = signs < 0
    return float(np.abs(mapped[:, flipped] + reference[:, flipped]).sum(axis=1).max())


def _period_cap(spec, params):
    # room for the transient to decay by about exp(-40) even at weak damping
    return max(DEFAULT_MAX_PERIODS, math.ceil(40.0 / (params.nu * spec.period)))


def _forward_backward(spec, params, horizon_periods, steps_per_period):
    rho0 = gibbs_state(build_static_hamiltonian(spec), params.beta)
    span = horizon_periods * spec.period
    _, fwd = trajectory(rho0, spec, params, 0.0, span, steps_per_period)
    _, bwd = trajectory(rho0, spec, params, 0.0, -span, steps_per_period)
    return expectations(spec, fwd), expectations(spec, bwd)


def forced_zero_residuals(spec: SystemSpec, params: ThermalParams, horizon_periods: int = 50,
                          steps_per_period: int = DEFAULT_STEPS_PER_PERIOD) -> dict[str, float]:
    """Magnitude of every component the symmetry analysis forces to zero.

    With damping this is the steady-state period average; without damping it
    is the average over the symmetric window ``[-N T, N T]``.
    """
    report = classify(spec, params)
    if not report.forced_zero:
        return {}
    if params.nu > 0:
        averages = steady_state(spec, params, max_periods=_period_cap(spec, params)).averages
    else:
        fwd, bwd = _forward_backward(spec, params, horizon_periods, steps_per_period)
        # trapezoid over [-NT, NT]; both halves share the t = 0 sample
        total = _trapezoid_sum(fwd) + _trapezoid_sum(bwd)
        averages = total / (2 * (fwd.shape[0] - 1))
    index = {"Sx": 0, "Sy": 1, "Sz": 2}
    return {name: float(abs(averages[index[name]])) for name in sorted(report.forced_zero)}


def _trapezoid_sum(samples):
    return samples[1:-1].sum(axis=0) + 0.5 * (samples[0] + samples[-1])
