"""Gibbs states, relaxation targets and the singlet statistical weight."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from .operators import SystemSpec, build_drive_coupling, build_static_hamiltonian

__all__ = [
    "TargetMode",
    "ThermalParams",
    "gibbs_state",
    "gibbs_states",
    "relaxation_target",
    "singlet_weight",
]


class TargetMode(enum.Enum):
    """State the dissipative term relaxes towards.

    STATIC relaxes to the Gibbs state of the undriven Hamiltonian,
    INSTANTANEOUS to the Gibbs state of ``H(t)``.
    """

    STATIC = "static"
    INSTANTANEOUS = "instantaneous"


@dataclass(frozen=True)
class ThermalParams:
    beta: float
    nu: float
    target_mode: TargetMode = TargetMode.STATIC

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"beta must be finite and non-negative, got {self.beta!r}")
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise ValueError(f"nu must be finite and non-negative, got {self.nu!r}")
        object.__setattr__(self, "target_mode", TargetMode(self.target_mode))


def gibbs_states(hamiltonians: NDArray, beta: float) -> NDArray[np.complex128]:
    """Batched ``exp(-beta H) / Z`` over the leading axes of ``hamiltonians``."""
    energies, vecs = np.linalg.eigh(hamiltonians)
    x = -beta * energies
    x = x - x.max(axis=-1, keepdims=True)
    w = np.exp(x)
    w = w / w.sum(axis=-1, keepdims=True)
    return (vecs * w[..., None, :]) @ np.swapaxes(vecs.conj(), -1, -2)


def gibbs_state(H: NDArray, beta: float) -> NDArray[np.complex128]:
    """Thermal state ``exp(-beta H) / Tr exp(-beta H)``.

    Uses the eigendecomposition with the largest exponent shifted to zero,
    so large ``beta`` cannot overflow. ``beta = 0`` gives ``1/d``.
    """
    return gibbs_states(np.asarray(H, dtype=complex), beta)


@lru_cache(maxsize=256)
def _static_target(spec: SystemSpec, beta: float) -> NDArray[np.complex128]:
    rho = gibbs_state(build_static_hamiltonian(spec), beta)
    rho.setflags(write=False)
    return rho


def relaxation_target(spec: SystemSpec, params: ThermalParams, t) -> NDArray[np.complex128]:
    """Target state of the relaxation term at time(s) ``t``.

    For an array of times the result has shape ``t.shape + (d, d)``.
    """
    if params.target_mode is TargetMode.STATIC:
        rho = _static_target(spec, params.beta)
        t = np.asarray(t)
        return rho if t.ndim == 0 else np.broadcast_to(rho, t.shape + rho.shape)
    h = np.asarray(spec.drive(t))
    H = build_static_hamiltonian(spec) + h[..., None, None] * build_drive_coupling(spec)
    return gibbs_states(H, params.beta)


def singlet_weight(beta: float, h0: float, J: float) -> float:
    """Statistical weight of the triplet sector for isotropic exchange ``J``.

    ``C1 = (2 cosh(beta h0) + 1) / (2 cosh(beta h0) + 1 + exp(-beta J))``,
    evaluated in log space so that extreme arguments do not overflow.
    """
    if beta == 0:
        return 0.75
    a = beta * abs(h0)
    # log(2 cosh a + 1), stable for large a
    log_triplet = a + math.log1p(math.exp(-2 * a) + math.exp(-a))
    return float(expit(beta * J + log_triplet))
