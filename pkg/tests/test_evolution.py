import math

import numpy as np
import pytest

from chargeflow import (
    AccuracyError, ConvergenceError, DomainError, Grid, PlaneWave, PulseParams, SolverConfig, WaveFunction,
    delta_charge, electric_field, evolve_pulse, extract_excitation, free_propagate, vector_potential,
)
from chargeflow.evolution import peak_field, pulse_grid
from chargeflow.gaussian import case, sample_position
from chargeflow.verify import small_pulse

PP = PulseParams(a0=0.7, omega0=0.3, tau=40.0, x_center=2.0, width=10.0)


def test_free_propagate(grid):
    psi = sample_position(case("A"), grid)
    assert free_propagate(psi, 0.0) is psi
    moved = free_propagate(psi, 1.0)
    rho = np.abs(moved.samples) ** 2
    assert np.sum(grid.x * rho) * grid.dx == pytest.approx(5.25, abs=1e-10)
    assert free_propagate(psi, 100.0).norm() == pytest.approx(psi.norm(), rel=1e-12)
    split = free_propagate(free_propagate(psi, 0.7), -2.2)
    np.testing.assert_allclose(split.samples, free_propagate(psi, -1.5).samples, atol=1e-12)
    with pytest.raises(ValueError):
        free_propagate(psi, math.inf)


def test_pulse_params_validation():
    with pytest.raises(ValueError):
        PulseParams(1.0, 0.3, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        PulseParams(1.0, 0.3, 1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(scheme="split_step")
    assert PP.region == (-3.0, 7.0)


def test_vector_potential_values():
    xs = np.linspace(-10, 15, 51)
    assert np.allclose(vector_potential(PP, xs, -PP.tau), 0.0, atol=1e-15)
    assert not np.any(vector_potential(PP, xs, 0.0))
    ts = np.linspace(-PP.tau, 0, 37)
    for edge in PP.region:
        assert np.allclose(vector_potential(PP, edge, ts), 0.0, atol=1e-15)
    assert vector_potential(PP, 2.0, -PP.tau / 2) == pytest.approx(PP.a0 * math.cos(PP.omega0 * PP.tau / 2))
    assert vector_potential(PP, 2.0, 3.0) == 0.0 and vector_potential(PP, 8.0, -5.0) == 0.0


def test_electric_field_is_minus_time_derivative(rng):
    zero = PulseParams(0.0, 0.3, 40.0, 2.0, 10.0)
    assert electric_field(zero, 1.0, -7.0) == 0.0
    assert electric_field(PP, PP.region[1], -7.0) == pytest.approx(0.0, abs=1e-15)
    h = 1e-5
    for x, t in zip(rng.uniform(-3, 7, 100), rng.uniform(-PP.tau + 1e-3, -1e-3, 100)):
        fd = -(vector_potential(PP, x, t + h) - vector_potential(PP, x, t - h)) / (2 * h)
        e = electric_field(PP, x, t)
        assert e == pytest.approx(fd, rel=1e-8, abs=1e-10 * PP.a0)


def test_f0_calibration():
    pp = PulseParams.from_f0(2e-3, 0.3, 40.0, 0.0, 10.0)
    assert peak_field(pp) == pytest.approx(2e-3, rel=1e-12)
    ts = np.linspace(-40, 0, 20001)
    assert np.abs(electric_field(pp, 0.0, ts)).max() <= 2e-3 * (1 + 1e-9)
    laser = PulseParams.laser(1e-3)
    assert laser.tau == pytest.approx(8 * math.pi / laser.omega0)
    assert laser.width == pytest.approx(800 * 18.8972612, rel=1e-6)


def test_geometry_checked():
    grid = Grid.from_bounds(-10.0, 25.0, 256)
    with pytest.raises(DomainError):
        evolve_pulse(PlaneWave(grid.dp * 4), PP, SolverConfig(), grid)


def test_zero_pulse_reproduces_plane_wave():
    pp, pw, grid = small_pulse(0.0)
    run = evolve_pulse(pw, pp, SolverConfig(dt=0.05), grid)
    assert np.max(np.abs(run.psi.samples - pw.on(grid).samples)) < 1e-10
    assert run.norm_drift < 1e-12
    assert not np.any(extract_excitation(run.psi, pw).samples)


def test_unitarity_and_diagnostics():
    pp, pw, grid = small_pulse(1e-2)
    run = evolve_pulse(pw, pp, SolverConfig(dt=0.05, convergence=1e-5), grid)
    assert run.norm_drift < 1e-9
    assert run.steps == math.ceil(pp.tau / 0.05 - 1e-9)
    assert run.dt_delta is not None and run.dt_delta < 1e-5
    assert run.stability > 0


def test_convergence_failure_raises():
    pp, pw, grid = small_pulse(1e-2)
    with pytest.raises(ConvergenceError):
        evolve_pulse(pw, pp, SolverConfig(dt=1.0, convergence=1e-12), grid)


def test_perturbative_population_scaling():
    pops = []
    for a0 in (1e-4, 1e-3):
        pp, pw, grid = small_pulse(a0)
        run = evolve_pulse(pw, pp, SolverConfig(dt=0.05, check_convergence=False), grid)
        pops.append(extract_excitation(run.psi, pw).norm())
    slope = math.log(pops[1] / pops[0]) / math.log(10)
    assert slope == pytest.approx(2.0, abs=0.1)


def test_extract_excitation_linearity(grid):
    pw = PlaneWave(5.0)
    base = pw.on(grid)
    assert not np.any(extract_excitation(base, pw).samples)
    phi = sample_position(case("B"), grid)
    np.testing.assert_allclose(extract_excitation(base + phi, pw).samples, phi.samples, atol=1e-14)
    spread = WaveFunction(grid, base.samples + 1e-3)
    with pytest.raises(AccuracyError):
        extract_excitation(spread, pw)


def test_uniform_vector_potential_is_pure_phase():
    """A spatially uniform A(t) commutes with momentum: the plane wave only picks up a phase."""
    grid = Grid.from_bounds(-100.0, 200.0, 2048)
    pw = PlaneWave(16 * grid.dp)
    pp = PulseParams(a0=0.05, omega0=0.5, tau=8 * math.pi / 0.5, x_center=0.0, width=math.inf)
    run = evolve_pulse(pw, pp, SolverConfig(dt=0.05, check_convergence=False), grid)
    ratio = run.psi.samples / pw.on(grid).samples
    assert abs(ratio[0] - 1) > 1e-4  # a nontrivial phase was acquired
    np.testing.assert_allclose(ratio, ratio[0], atol=1e-12)
    np.testing.assert_allclose(np.abs(run.psi.samples) ** 2, 1.0, atol=1e-12)
    # the excess density, i.e. the charge between any two probes, vanishes
    excess = np.abs(run.psi.samples) ** 2 - 1.0
    assert abs(excess.sum() * grid.dx) < 1e-6
