"""Relaxational Liouville dynamics and its periodic steady state.

The density matrix obeys

    d rho / dt = i [H(t), rho] - nu (rho - rho_e(t))

with ``rho_e`` one of the two relaxation targets of :mod:`acspin.thermal`.
Two independent routes to the asymptotic periodic solution are provided:

- :func:`steady_state` steps whole periods with fixed-step RK4 until the
  period-averaged magnetisation stops changing.
- :func:`harmonic_balance_steady_state` solves the truncated Fourier-space
  linear system directly.

Liouville-space vectors use row-major ``vec``: ``vec(A rho B) = (A kron B.T) vec(rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from numpy.typing import NDArray

from .operators import (
    SystemSpec,
    build_drive_coupling,
    build_static_hamiltonian,
    total_spin_operator,
)
from .thermal import TargetMode, ThermalParams, gibbs_state, relaxation_target

__all__ = [
    "InvalidParams",
    "NotConverged",
    "SingularSystem",
    "IntegrationError",
    "PeriodicSolution",
    "liouville_rhs",
    "integrate",
    "trajectory",
    "expectations",
    "fourier_harmonic",
    "steady_state",
    "harmonic_balance_steady_state",
    "default_steps_per_period",
    "default_harmonics",
]

AXES = ("x", "y", "z")
DEFAULT_STEPS_PER_PERIOD = 256
DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_PERIODS = 20_000
# RK4 step is shortened until (step * fastest frequency) stays below this
MAX_PHASE_PER_STEP = 0.02
_CHUNK = 2048


class InvalidParams(ValueError):
    pass


class SingularSystem(RuntimeError):
    pass


class IntegrationError(RuntimeError):
    """The integrated state became non-finite."""


class NotConverged(RuntimeError):
    """Period cap reached before the averages settled.

    The best available solution is attached as ``solution``.
    """

    def __init__(self, residual: float, solution: "PeriodicSolution"):
        super().__init__(f"steady state not converged: residual {residual:.3e} after "
                         f"{solution.periods_used} periods")
        self.residual = residual
        self.solution = solution


@dataclass
class PeriodicSolution:
    """One period of the asymptotic state, reduced to magnetisation data.

    Attributes
    ----------
    averages : ndarray, shape (3,)
        Period averages of the (x, y, z) magnetisation.
    harmonics : dict
        ``n -> complex array (3,)``, Fourier coefficients of the component
        series for ``n >= 0``; ``harmonics[0]`` equals ``averages``.
    periods_used, converged, residual
        Bookkeeping of the solver. ``residual`` is the estimated distance of
        the averages from their limit, ``r / (1 - exp(-nu T))`` for the last
        period-to-period change ``r`` (time stepping), or the linear-system residual
        (harmonic balance).
    trace_error, hermiticity_error
        Largest deviation of ``Tr rho`` from 1 and of ``rho - rho^dagger``
        from 0 seen over the run.
    series : ndarray, shape (N, 3), optional
        Magnetisation sampled at ``t_j = j T / N`` over the final period
        (time stepping only).
    """

    averages: NDArray[np.float64]
    harmonics: dict[int, NDArray[np.complex128]]
    periods_used: int
    converged: bool
    residual: float
    trace_error: float = 0.0
    hermiticity_error: float = 0.0
    method: str = "timestep"
    series: NDArray[np.float64] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def sx(self) -> float:
        return float(self.averages[0])

    @property
    def sy(self) -> float:
        return float(self.averages[1])

    @property
    def sz(self) -> float:
        return float(self.averages[2])


def _check_nu(params: ThermalParams):
    if not params.nu > 0:
        raise InvalidParams(f"a periodic steady state needs nu > 0, got {params.nu!r}")


class _Rhs:
    """``i [H(t), rho] - nu (rho - rho_e(t))`` with operators built once."""

    def __init__(self, spec: SystemSpec, params: ThermalParams):
        self.spec, self.params = spec, params
        self.H0 = build_static_hamiltonian(spec)
        self.V = build_drive_coupling(spec)
        self.static = params.target_mode is TargetMode.STATIC
        self.target = relaxation_target(spec, params, 0.0) if self.static else None

    def __call__(self, t: float, rho):
        H = self.H0 + self.spec.drive(t) * self.V
        out = 1j * (H @ rho - rho @ H)
        nu = self.params.nu
        if nu:
            target = self.target if self.static else relaxation_target(self.spec, self.params, t)
            out = out - nu * (rho - target)
        return out


def liouville_rhs(rho, spec: SystemSpec, params: ThermalParams, t: float):
    """``i [H(t), rho] - nu (rho - rho_e(t))``."""
    return _Rhs(spec, params)(t, np.asarray(rho, dtype=complex))


def expectations(spec: SystemSpec, rho) -> NDArray[np.float64]:
    """Magnetisation ``Tr(S_a rho)`` for a ``(..., d, d)`` stack of states."""
    rho = np.asarray(rho)
    ops = np.stack([total_spin_operator(spec, a) for a in AXES])
    return np.einsum("aji,...ij->...a", ops, rho).real


def _n_steps(spec: SystemSpec, t0: float, t1: float, steps_per_period: int) -> tuple[int, float]:
    if steps_per_period < 64:
        raise ValueError("steps_per_period must be at least 64")
    h = spec.period / steps_per_period
    n = abs(round((t1 - t0) / h))
    if abs(n * h - abs(t1 - t0)) > 1e-9 * max(1.0, abs(t1 - t0)):
        raise ValueError("integration span must be a whole number of steps")
    return n, math.copysign(h, t1 - t0)


def trajectory(rho0, spec: SystemSpec, params: ThermalParams, t0: float, t1: float,
               steps_per_period: int = DEFAULT_STEPS_PER_PERIOD):
    """Fixed-step RK4 from ``t0`` to ``t1`` (either direction).

    Returns
    -------
    times : ndarray, shape (n + 1,)
    states : ndarray, shape (n + 1, d, d)
    """
    n, h = _n_steps(spec, t0, t1, steps_per_period)
    rho = np.array(rho0, dtype=complex)
    states = np.empty((n + 1,) + rho.shape, dtype=complex)
    states[0] = rho
    times = t0 + h * np.arange(n + 1)

    f = _Rhs(spec, params)
    for j in range(n):
        t = times[j]
        k1 = f(t, rho)
        k2 = f(t + h / 2, rho + h / 2 * k1)
        k3 = f(t + h / 2, rho + h / 2 * k2)
        k4 = f(t + h, rho + h * k3)
        rho = rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(rho)):
            raise IntegrationError(f"non-finite state at t = {t + h:g}")
        states[j + 1] = rho
    return times, states


def integrate(rho0, spec: SystemSpec, params: ThermalParams, t0: float, t1: float,
              steps_per_period: int = DEFAULT_STEPS_PER_PERIOD):
    """State at ``t1`` after fixed-step RK4 from ``rho0`` at ``t0``."""
    return trajectory(rho0, spec, params, t0, t1, steps_per_period)[1][-1]


def fourier_harmonic(series, n: int) -> complex:
    """``A_n = (1/T) int_0^T exp(-i n w t) f(t) dt`` from uniform samples.

    ``series`` holds ``N`` samples at ``t_j = j T / N`` (endpoint excluded);
    the rectangle rule is then exact for trigonometric polynomials of degree
    below ``N / 2``.
    """
    f = np.asarray(series)
    N = f.shape[0]
    phase = np.exp(-2j * np.pi * n * np.arange(N) / N)
    return complex(phase @ f / N)


# Liouville-space machinery -----------------------------------------------------

def _commutator_super(X: NDArray) -> NDArray:
    """Superoperator of ``rho -> X rho - rho X`` for row-major vec."""
    eye = np.eye(X.shape[0])
    return np.kron(X, eye) - np.kron(eye, X.T)


def _spectral_width(X: NDArray) -> float:
    e = np.linalg.eigvalsh(X)
    return float(e[-1] - e[0])


def default_steps_per_period(spec: SystemSpec, nu: float = 0.0) -> int:
    """Fixed RK4 resolution: 256 per period, more when the period is long.

    The step is capped so that the fastest coherent frequency of ``H(t)``,
    and the relaxation rate ``nu`` when given, advance at most
    ``MAX_PHASE_PER_STEP`` per step.
    """
    fastest = (_spectral_width(build_static_hamiltonian(spec))
               + spec.drive.total_amplitude * _spectral_width(build_drive_coupling(spec)))
    n = math.ceil(spec.period * max(fastest, spec.omega, nu) / MAX_PHASE_PER_STEP)
    return max(DEFAULT_STEPS_PER_PERIOD, n)


def _observable_rows(spec: SystemSpec) -> NDArray:
    """Rows ``o_a`` with ``o_a . [vec rho, 1] = Tr(S_a rho)``."""
    d = spec.dim
    rows = np.zeros((3, d * d + 1), dtype=complex)
    for i, a in enumerate(AXES):
        rows[i, :-1] = total_spin_operator(spec, a).T.reshape(-1)
    return rows


def _step_maps(spec: SystemSpec, params: ThermalParams, t_start: float, h: float, n: int):
    """Yield RK4 one-step maps on the augmented vector ``[vec rho, 1]``.

    For a linear inhomogeneous ODE an RK4 step is an affine map; it is
    produced in chunks of shape ``(m, D, D)`` with ``D = d^2 + 1``.
    """
    d = spec.dim
    D = d * d + 1
    L0 = 1j * _commutator_super(build_static_hamiltonian(spec)) - params.nu * np.eye(d * d)
    LV = 1j * _commutator_super(build_drive_coupling(spec))
    eye = np.eye(D)

    def generator(t):
        A = np.zeros(t.shape + (D, D), dtype=complex)
        A[..., :-1, :-1] = L0 + np.asarray(spec.drive(t))[..., None, None] * LV
        if params.nu:
            target = relaxation_target(spec, params, t)
            A[..., :-1, -1] = params.nu * target.reshape(t.shape + (d * d,))
        return A

    for start in range(0, n, _CHUNK):
        t = t_start + h * np.arange(start, min(n, start + _CHUNK))
        A0, Am, A1 = generator(t), generator(t + h / 2), generator(t + h)
        k1 = A0
        k2 = Am @ (eye + h / 2 * k1)
        k3 = Am @ (eye + h / 2 * k2)
        k4 = A1 @ (eye + h * k3)
        yield eye + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _state_errors(y: NDArray, d: int) -> tuple[float, float]:
    rho = y[..., :-1].reshape(y.shape[:-1] + (d, d))
    trace = np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1).max()
    herm = np.abs(rho - np.swapaxes(rho.conj(), -1, -2)).max()
    return float(trace), float(herm)


def steady_state(spec: SystemSpec, params: ThermalParams, *,
                 steps_per_period: int | None = None,
                 tol: float = DEFAULT_TOLERANCE,
                 max_periods: int = DEFAULT_MAX_PERIODS,
                 n_harmonics: int = 8,
                 rho0=None) -> PeriodicSolution:
    """Periodic attractor by RK4 time stepping over whole periods.

    Starting from ``rho_beta(H0)`` (or ``rho0``), periods are stepped until
    the estimated distance of the period-averaged magnetisation from its limit
    drops below ``tol`` (sup norm), and at least ``max(20, ceil(10 / (nu T)))``
    periods have elapsed. Deviations between solutions contract by exactly
    ``q = exp(-nu T)`` per period, so the distance is estimated from the
    period-to-period change ``r`` as the geometric tail ``r / (1 - q)``. One further period is then sampled for the
    averages and harmonics.

    Raises
    ------
    InvalidParams
        If ``nu <= 0``.
    NotConverged
        If ``max_periods`` is reached first; the exception carries the last
        solution.
    """
    _check_nu(params)
    N = steps_per_period or default_steps_per_period(spec, params.nu)
    if N < 64:
        raise ValueError("steps_per_period must be at least 64")
    T = spec.period
    h = T / N
    d = spec.dim
    D = d * d + 1
    obs = _observable_rows(spec)

    # period map, and the trapezoid period-average functional of the start state
    M = np.eye(D, dtype=complex)
    avg_functional = 0.5 * obs
    sample_rows = np.empty((N, 3, D), dtype=complex)
    j = 0
    for chunk in _step_maps(spec, params, 0.0, h, N):
        for P in chunk:
            sample_rows[j] = obs @ M
            M = P @ M
            j += 1
            if j < N:
                avg_functional = avg_functional + obs @ M
    avg_functional = (avg_functional + 0.5 * obs @ M) / N

    if rho0 is None:
        rho0 = gibbs_state(build_static_hamiltonian(spec), params.beta)
    y = np.append(np.asarray(rho0, dtype=complex).reshape(-1), 1.0)

    floor = max(20, math.ceil(10.0 / (params.nu * T)))
    tail = 1.0 / -math.expm1(-params.nu * T)
    prev = (avg_functional @ y).real
    trace_err, herm_err = _state_errors(y, d)
    residual = math.inf
    periods = 0
    converged = False
    while periods < max_periods:
        y = M @ y
        periods += 1
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state after {periods} periods")
        te, he = _state_errors(y, d)
        trace_err, herm_err = max(trace_err, te), max(herm_err, he)
        avg = (avg_functional @ y).real
        residual = float(np.abs(avg - prev).max()) * tail
        prev = avg
        if periods >= floor and residual < tol:
            converged = True
            break

    samples = (sample_rows @ y).real
    spectrum = np.fft.fft(samples, axis=0) / N
    harmonics = {n: spectrum[n].copy() for n in range(min(n_harmonics, N // 2) + 1)}
    harmonics[0] = harmonics[0].real.astype(complex)
    solution = PeriodicSolution(
        averages=samples.mean(axis=0),
        harmonics=harmonics,
        periods_used=periods + 1,
        converged=converged,
        residual=residual,
        trace_error=trace_err,
        hermiticity_error=herm_err,
        method="timestep",
        series=samples,
        extra={"steps_per_period": N},
    )
    if not converged:
        raise NotConverged(residual, solution)
    return solution


# Harmonic balance --------------------------------------------------------------

def default_harmonics(spec: SystemSpec, params: ThermalParams | None = None) -> int:
    """Fourier truncation order adequate for the drive modulation depth.

    The coherent drive spreads the response over roughly
    ``sum_n |eps_n| width(V) / (n omega)`` harmonics; a margin is added on top.
    """
    width = _spectral_width(build_drive_coupling(spec))
    depth = sum(abs(hm.amplitude) * width / (hm.n * spec.omega) for hm in spec.drive.harmonics)
    K = math.ceil(1.25 * depth + 4 * depth ** (1 / 3) + 24)
    if params is not None and params.target_mode is TargetMode.INSTANTANEOUS:
        K = max(K, 64)
    return max(K, 3 * spec.drive.max_order)


def _target_harmonics(spec: SystemSpec, params: ThermalParams, K: int) -> NDArray:
    """Fourier coefficients ``rho_e[k]``, ``k = -K..K``, as vec rows."""
    d = spec.dim
    if params.target_mode is TargetMode.STATIC:
        out = np.zeros((2 * K + 1, d * d), dtype=complex)
        out[K] = relaxation_target(spec, params, 0.0).reshape(-1)
        return out
    m = max(1024, 8 * K)
    t = spec.period * np.arange(m) / m
    samples = relaxation_target(spec, params, t).reshape(m, d * d)
    coeffs = np.fft.fft(samples, axis=0) / m
    k = np.arange(-K, K + 1)
    return coeffs[k % m]


def harmonic_balance_steady_state(spec: SystemSpec, params: ThermalParams,
                                  n_harmonics: int | None = None) -> PeriodicSolution:
    """Periodic attractor from the truncated Fourier-space linear system.

    With ``rho(t) = sum_k rho_k exp(i k w t)`` for ``|k| <= K`` the equation
    of motion becomes

        (i k w + nu) rho_k - i [H0, rho_k] - i sum_m c_m [V, rho_{k-m}] = nu rho_e[k]

    where ``c_m`` are the complex drive coefficients. The sparse system is
    solved by LU factorisation.

    Raises
    ------
    InvalidParams
        ``nu <= 0`` or a truncation too short for the drive.
    SingularSystem
        The truncated operator is numerically singular.
    """
    _check_nu(params)
    K = default_harmonics(spec, params) if n_harmonics is None else int(n_harmonics)
    if K < 3 * spec.drive.max_order:
        raise InvalidParams("n_harmonics must be at least 3x the highest drive harmonic")
    d = spec.dim
    n = d * d
    size = 2 * K + 1
    L0 = sps.csr_matrix(1j * _commutator_super(build_static_hamiltonian(spec)))
    LV = sps.csr_matrix(1j * _commutator_super(build_drive_coupling(spec)))
    ks = np.arange(-K, K + 1)

    diag_part = sps.kron(sps.diags(1j * ks * spec.omega + params.nu), sps.identity(n)) \
        - sps.kron(sps.identity(size), L0)
    blocks = [diag_part]
    for m, c in spec.drive.fourier_coefficients().items():
        if c == 0:
            continue
        # couples rho_k to rho_{k-m}
        shift = sps.eye(size, k=-m)
        blocks.append(-c * sps.kron(shift, LV))
    A = sum(blocks[1:], blocks[0]).tocsc()
    b = params.nu * _target_harmonics(spec, params, K).reshape(-1)

    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise SingularSystem("non-finite harmonic-balance solution")
    residual = float(np.abs(A @ x - b).max())

    rho_k = x.reshape(size, d, d)
    obs = np.stack([total_spin_operator(spec, a) for a in AXES])
    comps = np.einsum("aji,kij->ka", obs, rho_k)
    rho_0 = rho_k[K]
    trace_err = float(abs(np.trace(rho_0) - 1))
    herm_err = float(np.abs(rho_k - np.conj(rho_k[::-1]).swapaxes(-1, -2)).max())
    harmonics = {int(k): comps[K + k].copy() for k in range(0, min(K, 8) + 1)}
    harmonics[0] = comps[K].real.astype(complex)
    return PeriodicSolution(
        averages=comps[K].real.copy(),
        harmonics=harmonics,
        periods_used=0,
        converged=True,
        residual=residual,
        trace_error=trace_err,
        hermiticity_error=herm_err,
        method="harmonic_balance",
        extra={"n_harmonics": K, "edge_weight": float(np.abs(rho_k[[0, -1]]).max())},
    )
