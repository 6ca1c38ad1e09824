"""Spin operators, drive waveforms and Hamiltonians.

Conventions
-----------
- hbar = 1; fields are in energy units.
- Single spin basis: ``|up>, |down>``.
- Spin pair basis: ``|uu>, |ud>, |du>, |dd>`` (site 1 is the left tensor factor).
- Exchange enters as ``-Jx Sx1 Sx2 - Jy Sy1 Sy2 - Jz Sz1 Sz2``, so ``J > 0`` is
  ferromagnetic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "SystemKind",
    "Harmonic",
    "DriveWaveform",
    "SystemSpec",
    "pauli_operator",
    "embed_pair_operator",
    "total_spin_operator",
    "build_static_hamiltonian",
    "build_drive_coupling",
    "hamiltonian_at",
]

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


class SystemKind(enum.Enum):
    SINGLE = "single"
    PAIR = "pair"

    @property
    def dim(self) -> int:
        return 2 if self is SystemKind.SINGLE else 4


@dataclass(frozen=True)
class Harmonic:
    """One term ``amplitude * cos(n * omega * t + phase)`` of the drive."""

    n: int
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"harmonic order must be a positive integer, got {self.n!r}")


@dataclass(frozen=True)
class DriveWaveform:
    """Zero-mean periodic drive ``h(t) = sum_n eps_n cos(n w t + theta_n)``.

    Parameters
    ----------
    omega : float
        Fundamental angular frequency, ``T = 2 pi / omega``.
    harmonics : tuple of Harmonic
        Harmonic table. A constant (n = 0) term is not representable, so the
        drive always has zero mean over one period.
    """

    omega: float
    harmonics: tuple[Harmonic, ...] = ()

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega!r}")
        object.__setattr__(self, "harmonics", tuple(self.harmonics))

    @classmethod
    def cosine(cls, amplitude: float, omega: float) -> "DriveWaveform":
        """Single harmonic ``amplitude * cos(omega t)``."""
        return cls(omega=omega, harmonics=(Harmonic(1, amplitude, 0.0),))

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def max_order(self) -> int:
        return max((hm.n for hm in self.harmonics), default=0)

    @property
    def total_amplitude(self) -> float:
        return sum(abs(hm.amplitude) for hm in self.harmonics)

    def with_omega(self, omega: float) -> "DriveWaveform":
        return DriveWaveform(omega=omega, harmonics=self.harmonics)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for hm in self.harmonics:
            out = out + hm.amplitude * np.cos(hm.n * self.omega * t + hm.phase)
        return out if out.ndim else float(out)

    def fourier_coefficients(self) -> dict[int, complex]:
        """Complex coefficients ``c_m`` with ``h(t) = sum_m c_m exp(i m w t)``."""
        coeffs: dict[int, complex] = {}
        for hm in self.harmonics:
            c = 0.5 * hm.amplitude * complex(math.cos(hm.phase), math.sin(hm.phase))
            coeffs[hm.n] = coeffs.get(hm.n, 0.0) + c
            coeffs[-hm.n] = coeffs.get(-hm.n, 0.0) + c.conjugate()
        return coeffs


@dataclass(frozen=True)
class SystemSpec:
    """Physical configuration of a driven single spin or spin pair.

    ``alpha = sin(phi)`` and ``gamma = cos(phi)`` are always derived from
    ``phi``; they are never stored.
    """

    kind: SystemKind
    h0: float
    phi: float
    drive: DriveWaveform
    exchange: tuple[float, float, float] | None = None

    def __post_init__(self):
        kind = SystemKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is SystemKind.SINGLE and self.exchange is not None:
            raise ValueError("a single spin has no exchange coupling")
        if kind is SystemKind.PAIR:
            exchange = (0.0, 0.0, 0.0) if self.exchange is None else self.exchange
            if len(exchange) != 3:
                raise ValueError("exchange must be (Jx, Jy, Jz)")
            object.__setattr__(self, "exchange", tuple(float(j) for j in exchange))

    @classmethod
    def single(cls, h0: float, phi: float, drive: DriveWaveform) -> "SystemSpec":
        return cls(SystemKind.SINGLE, h0, phi, drive)

    @classmethod
    def pair(
        cls, h0: float, phi: float, drive: DriveWaveform, exchange: Sequence[float]
    ) -> "SystemSpec":
        return cls(SystemKind.PAIR, h0, phi, drive, tuple(exchange))

    @property
    def dim(self) -> int:
        return self.kind.dim

    @property
    def alpha(self) -> float:
        return math.sin(self.phi)

    @property
    def gamma(self) -> float:
        return math.cos(self.phi)

    @property
    def omega(self) -> float:
        return self.drive.omega

    @property
    def period(self) -> float:
        return self.drive.period

    def with_omega(self, omega: float) -> "SystemSpec":
        return SystemSpec(self.kind, self.h0, self.phi, self.drive.with_omega(omega), self.exchange)

    def replace(self, **changes) -> "SystemSpec":
        fields = dict(kind=self.kind, h0=self.h0, phi=self.phi, drive=self.drive, exchange=self.exchange)
        fields.update(changes)
        return SystemSpec(**fields)


def pauli_operator(axis: str) -> NDArray[np.complex128]:
    """Spin-1/2 operator ``S_axis = sigma_axis / 2``."""
    return 0.5 * _PAULI[axis].copy()


def embed_pair_operator(axis: str, site: int) -> NDArray[np.complex128]:
    """Single-site spin operator embedded in the 4-dimensional pair space."""
    s = pauli_operator(axis)
    eye = np.eye(2, dtype=complex)
    if site == 1:
        return np.kron(s, eye)
    if site == 2:
        return np.kron(eye, s)
    raise ValueError(f"site must be 1 or 2, got {site!r}")


def total_spin_operator(spec: SystemSpec, axis: str) -> NDArray[np.complex128]:
    """Observable whose expectation is the reported magnetisation component.

    For the pair this is ``(S^1 + S^2) / 2``, so expectations lie in
    ``[-1/2, 1/2]`` for both system kinds.
    """
    if spec.kind is SystemKind.SINGLE:
        return pauli_operator(axis)
    return 0.5 * (embed_pair_operator(axis, 1) + embed_pair_operator(axis, 2))


def _site_sum(axis: str) -> NDArray[np.complex128]:
    return embed_pair_operator(axis, 1) + embed_pair_operator(axis, 2)


def build_static_hamiltonian(spec: SystemSpec) -> NDArray[np.complex128]:
    if spec.kind is SystemKind.SINGLE:
        return spec.h0 * pauli_operator("z")
    jx, jy, jz = spec.exchange
    h = spec.h0 * _site_sum("z")
    for j, axis in zip((jx, jy, jz), "xyz"):
        h = h - j * embed_pair_operator(axis, 1) @ embed_pair_operator(axis, 2)
    return h


def build_drive_coupling(spec: SystemSpec) -> NDArray[np.complex128]:
    """Operator ``V`` multiplying the drive: ``H(t) = H0 + h(t) V``."""
    if spec.kind is SystemKind.SINGLE:
        sx, sz = pauli_operator("x"), pauli_operator("z")
    else:
        sx, sz = _site_sum("x"), _site_sum("z")
    return spec.alpha * sx + spec.gamma * sz


def hamiltonian_at(spec: SystemSpec, t: float) -> NDArray[np.complex128]:
    return build_static_hamiltonian(spec) + spec.drive(t) * build_drive_coupling(spec)
