import math

import numpy as np
import pytest

from acspin.evolution import harmonic_balance_steady_state, steady_state
from acspin.operators import DriveWaveform, SystemSpec
from acspin.perturbation import perturbative_averages
from acspin.sweep import (
    CSV_COLUMNS,
    ConfigError,
    EmptySweep,
    Grid,
    InsufficientPoints,
    SolverOptions,
    SweepConfig,
    SweepResult,
    SweepRow,
    config_from_mapping,
    default_omega_grid,
    fit_scaling_exponent,
    inl_metric,
    load_config,
    parse_config_text,
    parse_value,
    run_sweep,
    solve_point,
    write_csv,
)
from acspin.thermal import TargetMode, ThermalParams


def small_config(fig1_spec, **kw):
    base = dict(system=fig1_spec, thermal=ThermalParams(10.0, 0.1), axis="omega",
                grid=Grid(0.5, 5.0, 12), solver=SolverOptions(method="timestep"),
                refine_peaks=False)
    base.update(kw)
    return SweepConfig(**base)


def test_sweep_is_deterministic(fig1_spec):
    config = small_config(fig1_spec)
    assert write_csv(run_sweep(config)) == write_csv(run_sweep(config))


@pytest.mark.parametrize("method", ["timestep", "harmonic_balance"])
def test_worker_count_independent(fig1_spec, method):
    config = small_config(fig1_spec, solver=SolverOptions(method=method))
    serial = run_sweep(config)
    parallel = run_sweep(small_config(fig1_spec, solver=SolverOptions(method=method), workers=3))
    assert write_csv(serial) == write_csv(parallel)
    assert serial.rows == parallel.rows


def test_rows_follow_ascending_grid(fig1_spec):
    result = run_sweep(small_config(fig1_spec, grid=Grid(5.0, 0.5, 7)))
    axis = result.column("axis")
    assert len(axis) == 7 and np.all(np.diff(axis) > 0)


def test_rows_match_direct_solves(fig1_spec):
    config = small_config(fig1_spec, grid=Grid(1.0, 4.0, 4))
    result = run_sweep(config)
    for row in result.rows:
        sol = steady_state(fig1_spec.with_omega(row.axis), config.thermal)
        np.testing.assert_array_equal(row.averages, sol.averages)
        assert row.converged and row.periods == sol.periods_used


def test_non_convergence_is_recorded(fig1_spec):
    config = small_config(fig1_spec, grid=Grid(1.0, 2.0, 3), thermal=ThermalParams(10.0, 1e-3),
                          solver=SolverOptions(method="timestep", max_periods=25))
    rows = run_sweep(config).rows
    assert not any(r.converged for r in rows)
    assert all(r.periods == 26 for r in rows)


def test_nu_and_beta_axes(fig1_spec):
    res = run_sweep(small_config(fig1_spec, axis="nu", grid=Grid(0.05, 0.5, 4, "log")))
    assert res.metrics == {} and res.peaks == []
    sol = harmonic_balance_steady_state(fig1_spec, ThermalParams(10.0, 0.5))
    np.testing.assert_allclose(res.rows[-1].averages, sol.averages, atol=1e-8)
    res = run_sweep(small_config(fig1_spec, axis="beta", grid=Grid(0.0, 20.0, 3)))
    assert res.rows[0].sz == pytest.approx(0.0, abs=1e-12)


def test_grid_validation():
    with pytest.raises(ConfigError):
        Grid(0.0, 10.0, 5, "log")
    with pytest.raises(ConfigError):
        Grid(-1.0, 10.0, 5, "log")
    with pytest.raises(ConfigError):
        Grid(1.0, 10.0, 1)
    with pytest.raises(ConfigError):
        Grid(1.0, 10.0, 5, "cubic")
    np.testing.assert_allclose(Grid(10.0, 1000.0, 3, "log").values(), [10.0, 100.0, 1000.0])


def test_config_validation(fig1_spec):
    with pytest.raises(ConfigError):
        SweepConfig(fig1_spec, ThermalParams(10.0, 0.1), axis="phi")
    with pytest.raises(ConfigError):
        SweepConfig(fig1_spec, ThermalParams(10.0, 0.1), axis="nu")
    with pytest.raises(ConfigError):
        SweepConfig(fig1_spec, ThermalParams(10.0, 0.1), columns=("axis", "Sw_avg"))
    with pytest.raises(ConfigError):
        SolverOptions(method="euler")


def test_default_omega_grid(fig1_spec, pair_spec):
    grid = default_omega_grid(fig1_spec)
    assert grid[0] == pytest.approx(0.05) and grid[-1] == pytest.approx(8.0)
    assert np.all(np.diff(grid) > 0)
    dense = grid[(grid > 2.7) & (grid < 3.3)]
    assert len(dense) >= 100
    pair_grid = default_omega_grid(pair_spec)
    assert len(pair_grid[(pair_grid > 0.37) & (pair_grid < 0.45)]) >= 90


def test_inl_metric_definition():
    rows = [SweepRow(w, 0.0, sy, sz, True, 1, 0.0)
            for w, sy, sz in [(1.0, 0.01, -0.5), (2.0, -0.03, -0.4), (3.0, 0.02, -0.45)]]
    assert inl_metric(SweepResult("omega", rows)) == pytest.approx(6.0)
    extra = [SweepRow(2.1, 0.0, 0.04, -0.4, True, 1, 0.0)]
    assert inl_metric(SweepResult("omega", rows, peaks=extra)) == pytest.approx(8.0)


def test_inl_errors():
    row = SweepRow(1.0, 0.0, 0.01, -0.5, True, 1, 0.0)
    with pytest.raises(EmptySweep):
        inl_metric(SweepResult("omega", [row]))
    with pytest.raises(EmptySweep):
        inl_metric(SweepResult("nu", [row, row]))


def test_peak_refinement_finds_resonance(fig1_spec):
    config = small_config(fig1_spec, grid=Grid(2.0, 4.0, 5), refine_peaks=True,
                          solver=SolverOptions())
    result = run_sweep(config)
    top = max(result.peaks, key=lambda r: abs(r.sy))
    fine = np.linspace(2.9, 3.1, 401)
    brute = [abs(harmonic_balance_steady_state(fig1_spec.with_omega(w), config.thermal).sy)
             for w in fine]
    assert abs(top.sy) >= max(brute) - 1e-12
    assert top.axis == pytest.approx(fine[int(np.argmax(brute))], abs=1e-3)
    assert result.metrics["i_nl"] >= 100 * abs(top.sy) / 0.5


def fake_result(nus, values, component="Sy"):
    rows = []
    for nu, v in zip(nus, values):
        avg = {"Sx": (v, 0.0, -0.5), "Sy": (0.0, v, -0.5)}[component]
        rows.append(SweepRow(float(nu), *avg, True, 1, 0.0))
    return SweepResult("nu", rows)


def test_fit_recovers_power_law():
    nus = np.logspace(0, 4, 17)
    result = fake_result(nus, 3.7 * nus ** -2.5)
    assert fit_scaling_exponent(result, "Sy") == pytest.approx(-2.5, abs=1e-12)
    assert fit_scaling_exponent(result, "Sy", (10, 1000)) == pytest.approx(-2.5, abs=1e-12)


@pytest.mark.parametrize("component, slope", [("Sx", -2.0), ("Sy", -3.0)])
def test_fit_on_oracle_values(component, slope):
    nus = np.logspace(1, 3, 21)
    p = perturbative_averages(3.0, math.pi / 4, 10.0, nus, 0.01, 1.5)
    values = p.a0x if component == "Sx" else p.a0y
    fit = fit_scaling_exponent(fake_result(nus, values, component), component, (10, 1000))
    assert fit == pytest.approx(slope, abs=0.05)


def test_fit_needs_four_points():
    result = fake_result(np.logspace(0, 4, 17), np.logspace(0, 4, 17))
    with pytest.raises(InsufficientPoints):
        fit_scaling_exponent(result, "Sy", (10, 20))


def test_adiabatic_contrast(fig1_spec):
    spec = fig1_spec.with_omega(0.05)
    solver = SolverOptions()
    static = solve_point(spec, ThermalParams(10.0, 0.1, TargetMode.STATIC), solver)
    inst = solve_point(spec, ThermalParams(10.0, 0.1, TargetMode.INSTANTANEOUS), solver)
    assert abs(inst.sy) * 5 <= abs(static.sy)


def test_csv_format(fig1_spec, tmp_path):
    result = run_sweep(small_config(fig1_spec, grid=Grid(1.0, 2.0, 3)))
    path = tmp_path / "out.csv"
    text = write_csv(result, path)
    assert path.read_text() == text
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    first = lines[1].split(",")
    assert float(first[0]) == 1.0 and float(first[2]) == result.rows[0].sy
    assert first[4] == "1" and first[5] == str(result.rows[0].periods)
    subset = write_csv(result, None, ("axis", "Sy_avg"))
    assert subset.splitlines()[0] == "axis,Sy_avg"


@pytest.mark.parametrize("text, value", [("3", 3.0), ("pi/4", math.pi / 4), ("sqrt(2)", math.sqrt(2)),
                                         ("-1e-3", -1e-3), ("2*pi/3 + 1", 2 * math.pi / 3 + 1)])
def test_parse_value(text, value):
    assert parse_value(text) == pytest.approx(value, abs=0)


@pytest.mark.parametrize("text", ["__import__('os')", "abs(2)", "1 +", "x"])
def test_parse_value_rejects(text):
    with pytest.raises(ConfigError):
        parse_value(text)


def test_config_file_roundtrip(tmp_path):
    path = tmp_path / "pair.cfg"
    path.write_text(
        "# easy-plane pair\n"
        "kind = pair\nJx = 5\nJy = 5   # same\nJz = 0\n"
        "nu = 1e-3\nharmonics = 1:sqrt(2), 2:0.5:pi/2\n"
        "axis = beta\nstart = 2\nstop = 20\npoints = 4\nspacing = log\n"
        "target = instantaneous\nworkers = 2\n"
    )
    config = config_from_mapping(load_config(path))
    assert config.system.exchange == (5.0, 5.0, 0.0)
    assert [h.n for h in config.system.drive.harmonics] == [1, 2]
    assert config.system.drive.harmonics[1].phase == pytest.approx(math.pi / 2)
    assert config.thermal.target_mode is TargetMode.INSTANTANEOUS
    assert config.grid == Grid(2.0, 20.0, 4, "log")
    assert config.workers == 2 and config.axis == "beta"


def test_config_defaults_are_reference_point():
    config = config_from_mapping({})
    assert config.system == SystemSpec.single(3.0, math.pi / 4, DriveWaveform.cosine(math.sqrt(2), 1.5))
    assert config.thermal == ThermalParams(10.0, 0.1)
    assert config.grid is None and config.solver.method == "harmonic_balance"


@pytest.mark.parametrize("values", [
    {"bogus": "1"}, {"kind": "triple"}, {"nu": "-1"}, {"start": "1", "stop": "2"},
    {"spacing": "log", "start": "0", "stop": "2", "points": "5"}, {"points": "2.5", "start": "1",
                                                                   "stop": "2"},
    {"harmonics": "0:1"}, {"harmonics": "1"}, {"refine_peaks": "maybe"}, {"target": "dynamic"},
])
def test_config_errors(values):
    with pytest.raises(ConfigError):
        config_from_mapping(values)


def test_config_text_errors():
    with pytest.raises(ConfigError):
        parse_config_text("nu 0.1\n")
    with pytest.raises(ConfigError):
        parse_config_text("speed = 3\n")
