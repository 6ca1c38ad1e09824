import math

import numpy as np
import pytest

from acspin.evolution import (
    InvalidParams,
    NotConverged,
    PeriodicSolution,
    default_harmonics,
    default_steps_per_period,
    expectations,
    fourier_harmonic,
    harmonic_balance_steady_state,
    integrate,
    liouville_rhs,
    steady_state,
    trajectory,
)
from acspin.operators import DriveWaveform, Harmonic, SystemSpec, build_static_hamiltonian
from acspin.perturbation import equilibrium_polarization
from acspin.thermal import TargetMode, ThermalParams, gibbs_state, relaxation_target

from conftest import random_density_matrix


def bloch_rhs(m, b, nu, m_e):
    """Independent single-spin oracle: dm/dt = m x b - nu (m - m_e)."""
    return np.cross(m, b) - nu * (m - m_e)


@pytest.mark.parametrize("mode", ["static", "instantaneous"])
def test_single_spin_component_equations(fig1_spec, mode):
    rng = np.random.default_rng(10)
    params = ThermalParams(0.8, 0.37, mode)
    for _ in range(100):
        t = rng.uniform(-10, 10)
        rho = random_density_matrix(rng, 2)
        h = fig1_spec.drive(t)
        b = np.array([fig1_spec.alpha * h, 0.0, fig1_spec.h0 + fig1_spec.gamma * h])
        m = expectations(fig1_spec, rho)
        m_e = expectations(fig1_spec, relaxation_target(fig1_spec, params, t))
        got = expectations(fig1_spec, liouville_rhs(rho, fig1_spec, params, t))
        np.testing.assert_allclose(got, bloch_rhs(m, b, params.nu, m_e), atol=1e-12)


def test_rhs_is_traceless_and_hermitian(pair_spec):
    rng = np.random.default_rng(11)
    params = ThermalParams(2.0, 0.3)
    for _ in range(20):
        d = liouville_rhs(random_density_matrix(rng, 4), pair_spec, params, rng.uniform(0, 5))
        assert abs(np.trace(d)) < 1e-13
        assert np.abs(d - d.conj().T).max() < 1e-13


def test_equilibrium_is_stationary():
    spec = SystemSpec.pair(3.0, 0.7, DriveWaveform.cosine(0.0, 1.5), (5.0, 5.0, 0.0))
    rho = gibbs_state(build_static_hamiltonian(spec), 10.0)
    assert np.abs(liouville_rhs(rho, spec, ThermalParams(10.0, 0.0), 0.4)).max() < 1e-14


def test_relaxation_at_rate_nu():
    spec = SystemSpec.single(3.0, 0.5, DriveWaveform.cosine(0.0, 1.0))
    params = ThermalParams(1.0, 0.4)
    rho_eq = gibbs_state(build_static_hamiltonian(spec), 1.0)
    rho0 = random_density_matrix(np.random.default_rng(12), 2)
    times, states = trajectory(rho0, spec, params, 0.0, 5 * spec.period, 512)
    dist = np.linalg.norm(states - rho_eq, axis=(1, 2))
    # the commutator part is a rotation, so the Frobenius distance decays exactly like exp(-nu t)
    np.testing.assert_allclose(dist, dist[0] * np.exp(-0.4 * times), rtol=1e-6)


def test_unitary_flow_is_isospectral(pair_spec):
    rho0 = random_density_matrix(np.random.default_rng(13), 4)
    _, states = trajectory(rho0, pair_spec, ThermalParams(1.0, 0.0), 0.0, 3 * pair_spec.period,
                           default_steps_per_period(pair_spec))
    ref = np.linalg.eigvalsh(rho0)
    for rho in states[::50]:
        np.testing.assert_allclose(np.linalg.eigvalsh(rho), ref, atol=1e-9)


def test_backward_integration_inverts_forward(fig1_spec, fig1_thermal):
    rho0 = random_density_matrix(np.random.default_rng(14), 2)
    T = fig1_spec.period
    fwd = integrate(rho0, fig1_spec, ThermalParams(1.0, 0.0), 0.0, 2 * T, 512)
    back = integrate(fwd, fig1_spec, ThermalParams(1.0, 0.0), 2 * T, 0.0, 512)
    np.testing.assert_allclose(back, rho0, atol=1e-9)


def test_rk4_fourth_order(fig1_spec, fig1_thermal):
    rho0 = random_density_matrix(np.random.default_rng(15), 2)
    T = fig1_spec.period
    ref = integrate(rho0, fig1_spec, fig1_thermal, 0.0, 2 * T, 4096)
    e1 = np.abs(integrate(rho0, fig1_spec, fig1_thermal, 0.0, 2 * T, 64) - ref).max()
    e2 = np.abs(integrate(rho0, fig1_spec, fig1_thermal, 0.0, 2 * T, 128) - ref).max()
    assert 12 < e1 / e2 < 20


def test_span_must_be_whole_steps(fig1_spec, fig1_thermal):
    with pytest.raises(ValueError):
        integrate(np.eye(2) / 2, fig1_spec, fig1_thermal, 0.0, 0.1234567, 256)


def test_fourier_harmonic_definitions():
    N = 64
    t = np.arange(N) / N
    const = np.full(N, 0.3)
    assert fourier_harmonic(const, 0) == pytest.approx(0.3)
    assert abs(fourier_harmonic(const, 2)) < 1e-16
    cos = np.cos(2 * np.pi * t)
    assert fourier_harmonic(cos, 1) == pytest.approx(0.5, abs=1e-15)
    assert fourier_harmonic(cos, -1) == pytest.approx(0.5, abs=1e-15)


def test_fourier_parseval():
    f = np.random.default_rng(16).normal(size=32)
    coeffs = [fourier_harmonic(f, n) for n in range(32)]
    assert sum(abs(c) ** 2 for c in coeffs) == pytest.approx(np.mean(f ** 2), rel=1e-12)


def test_steady_state_without_drive_is_equilibrium():
    spec = SystemSpec.single(3.0, math.pi / 4, DriveWaveform.cosine(0.0, 1.5))
    params = ThermalParams(10.0, 0.1)
    C = float(equilibrium_polarization(10.0, 3.0))
    sol = steady_state(spec, params)
    np.testing.assert_allclose(sol.averages, [0, 0, -C], atol=1e-12)
    hb = harmonic_balance_steady_state(spec, params)
    np.testing.assert_allclose(hb.averages, [0, 0, -C], atol=1e-15)


def test_off_resonance_plateau(fig1_spec, fig1_thermal):
    sol = steady_state(fig1_spec.with_omega(7.5), fig1_thermal)
    assert sol.sz == pytest.approx(-0.5, abs=0.02)
    assert abs(sol.sy) < 2e-3


@pytest.mark.parametrize("omega", [0.4, 1.5, 3.0, 5.0])
def test_solvers_agree(fig1_spec, fig1_thermal, omega):
    spec = fig1_spec.with_omega(omega)
    ts = steady_state(spec, fig1_thermal)
    hb = harmonic_balance_steady_state(spec, fig1_thermal)
    np.testing.assert_allclose(ts.averages, hb.averages, atol=1e-8)
    for n in (1, 2):
        np.testing.assert_allclose(ts.harmonics[n], hb.harmonics[n], atol=1e-8)


def test_solvers_agree_instantaneous_pair(pair_spec):
    params = ThermalParams(10.0, 0.2, TargetMode.INSTANTANEOUS)
    spec = pair_spec.with_omega(2.0)
    ts = steady_state(spec, params)
    hb = harmonic_balance_steady_state(spec, params)
    np.testing.assert_allclose(ts.averages, hb.averages, atol=1e-8)


def test_harmonic_balance_truncation_converged(fig1_spec, fig1_thermal):
    spec = fig1_spec.replace(drive=DriveWaveform.cosine(0.1, 1.5))
    K = default_harmonics(spec)
    a = harmonic_balance_steady_state(spec, fig1_thermal, K).averages
    b = harmonic_balance_steady_state(spec, fig1_thermal, 2 * K).averages
    assert np.abs(a - b).max() < 1e-10


def test_harmonic_balance_rejects_short_truncation(fig1_spec, fig1_thermal):
    spec = fig1_spec.replace(drive=DriveWaveform(1.5, (Harmonic(1, 1.0), Harmonic(3, 0.2))))
    with pytest.raises(InvalidParams):
        harmonic_balance_steady_state(spec, fig1_thermal, 8)


def test_attractor_is_unique(pair_spec):
    params = ThermalParams(10.0, 1e-3)
    spec = pair_spec.with_omega(5.0)
    tol = 1e-10
    a = steady_state(spec, params, tol=tol)
    b = steady_state(spec, params, tol=tol, rho0=np.eye(4) / 4)
    assert np.abs(a.averages - b.averages).max() <= 10 * tol


@pytest.mark.parametrize("solver", [steady_state, harmonic_balance_steady_state])
def test_requires_dissipation(fig1_spec, solver):
    with pytest.raises(InvalidParams):
        solver(fig1_spec, ThermalParams(10.0, 0.0))


def test_not_converged_carries_solution(fig1_spec):
    with pytest.raises(NotConverged) as info:
        steady_state(fig1_spec, ThermalParams(10.0, 1e-3), max_periods=30)
    sol = info.value.solution
    assert isinstance(sol, PeriodicSolution)
    assert not sol.converged and sol.periods_used == 31
    assert info.value.residual > 1e-10


@pytest.mark.parametrize("spec_name", ["fig1_spec", "pair_spec"])
def test_conservation_bounds(request, spec_name):
    spec = request.getfixturevalue(spec_name)
    for params in (ThermalParams(10.0, 0.1), ThermalParams(10.0, 0.1, "instantaneous")):
        ts = steady_state(spec, params)
        hb = harmonic_balance_steady_state(spec, params)
        for sol in (ts, hb):
            assert sol.trace_error <= 1e-9
            assert sol.hermiticity_error <= 1e-9


def test_series_matches_averages(fig1_spec, fig1_thermal):
    sol = steady_state(fig1_spec, fig1_thermal)
    np.testing.assert_allclose(sol.series.mean(axis=0), sol.averages, atol=1e-15)
    np.testing.assert_allclose(sol.harmonics[0].real, sol.averages, atol=1e-15)
    n = sol.series.shape[0]
    assert n == sol.extra["steps_per_period"] >= default_steps_per_period(fig1_spec, 0.1)


def test_default_resolution_grows_for_slow_drives(fig1_spec):
    steps = [default_steps_per_period(fig1_spec.with_omega(w)) for w in (6.0, 1.5, 0.05)]
    assert steps[0] >= 256 and steps[0] < steps[1] < steps[2]
    # at most 0.02 rad of the fastest frequency per step
    assert 2 * np.pi / 0.05 * (3 + np.sqrt(2)) / steps[2] <= 0.02
    assert default_steps_per_period(fig1_spec, nu=500.0) * 0.02 >= fig1_spec.period * 500
