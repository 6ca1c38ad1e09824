"""Second-order small-amplitude predictions for the single spin.

For ``h(t) = eps cos(omega t)`` the period-averaged magnetisation is, up to
``O(eps^3)``,

    A0x = -eps^2 a g C (nu^2 + w^2 - h0^2) / (2 D)
    A0y =  eps^2 a g nu h0 C / D
    A0z = -C + eps^2 a^2 C (nu^2 + w^2 + h0^2) / (2 D)

with ``a = sin(phi)``, ``g = cos(phi)``, ``C = tanh(beta h0 / 2) / 2`` and
``D = (h0^2 - w^2)^2 + nu^2 (nu^2 + 2 h0^2 + 2 w^2)``. ``C`` is the static
equilibrium polarisation, so these formulas describe the static relaxation
target only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import InvalidParams

__all__ = ["PerturbativeAverages", "equilibrium_polarization", "perturbative_averages",
           "resonance_averages"]


@dataclass(frozen=True)
class PerturbativeAverages:
    a0x: float
    a0y: float
    a0z: float
    delta: float
    validity: dict

    @property
    def valid(self) -> bool:
        return all(self.validity.values())

    def as_array(self):
        return np.array([self.a0x, self.a0y, self.a0z])


def equilibrium_polarization(beta, h0):
    """``C = tanh(beta h0 / 2) / 2``, so that ``<S_z>_eq = -C``."""
    return 0.5 * np.tanh(0.5 * np.asarray(beta) * np.asarray(h0))


def perturbative_averages(h0, phi, beta, nu, epsilon, omega) -> PerturbativeAverages:
    """Evaluate the second-order averages; arguments broadcast like numpy.

    ``validity`` records whether ``eps`` is small in absolute terms
    (``eps < 1/2``) and compared with the damping (``eps < nu/2``).
    """
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise InvalidParams("perturbative averages need nu > 0")
    alpha, gamma = np.sin(phi), np.cos(phi)
    C = equilibrium_polarization(beta, h0)
    h2, w2, n2 = np.square(h0), np.square(omega), np.square(nu)
    delta = (h2 - w2) ** 2 + n2 * (n2 + 2 * h2 + 2 * w2)
    e2 = np.square(epsilon)
    a0x = -e2 * alpha * gamma * C * (n2 + w2 - h2) / (2 * delta)
    a0y = e2 * alpha * gamma * nu * h0 * C / delta
    a0z = -C + e2 * alpha**2 * C * (n2 + w2 + h2) / (2 * delta)
    eps = np.abs(epsilon)
    validity = {
        "eps_small": bool(np.all(eps < 0.5)),
        "eps_below_nu": bool(np.all(eps < nu / 2)),
    }
    return PerturbativeAverages(_scalar(a0x), _scalar(a0y), _scalar(a0z), _scalar(delta), validity)


def resonance_averages(h0, phi, beta, nu, epsilon):
    """``(A0x, A0y)`` at ``omega = h0`` in the form using ``xi = nu / h0``."""
    if np.any(np.asarray(h0) <= 0) or np.any(np.asarray(nu) <= 0):
        raise InvalidParams("resonance averages need h0 > 0 and nu > 0")
    xi = np.asarray(nu) / h0
    pref = np.square(epsilon) * np.sin(phi) * np.cos(phi) * equilibrium_polarization(beta, h0)
    a0x = -pref / (2 * np.square(h0) * (4 + xi**2))
    a0y = pref / (xi * np.square(h0) * (4 + xi**2))
    return _scalar(a0x), _scalar(a0y)


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x
