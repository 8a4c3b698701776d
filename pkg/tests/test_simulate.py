import numpy as np
import pytest

from pieforge.converter import convert_gpde
from pieforge.discretize import SpectralBasis, differentiation_matrix, discretize_pie
from pieforge.gpde import GpdeModel
from pieforge.io import load_builtin
from pieforge.oracle import heat_reference
from pieforge.simulate import (SignalSpec, SimConfig, SimulationError, gain_row, initial_state,
                               pencil_eigenvalues, read_states_csv, reconstruct_trajectory, run,
                               write_outputs_csv, write_states_csv)


@pytest.fixture(scope="module")
def heat():
    model, cfg, _, _ = load_builtin("heat", full=True)
    return convert_gpde(model), cfg


def test_heat_energy_decreases(heat):
    pie, cfg = heat
    traj = run(pie, cfg)
    assert np.all(np.diff(traj.energy) <= 1e-10)
    assert traj.t[-1] == pytest.approx(0.1)


def test_heat_matches_series_and_boundary_conditions(heat):
    pie, cfg = heat
    traj = run(pie, cfg)
    _, ch = reconstruct_trajectory(traj)
    b = traj.disc.basis
    D = differentiation_matrix(b)
    u = ch[:, 0, :]
    assert np.max(np.abs(u[:, 0])) <= 1e-8
    assert np.max(np.abs(u @ D[-1])) <= 1e-8
    ref = heat_reference(0.1, b.nodes, lambda s: np.sin(np.pi * s / 2))
    assert np.sqrt(b.integrate((u[-1] - ref) ** 2)) <= 1e-3


def test_heat_resolution_independence(heat):
    pie, cfg = heat
    u16 = reconstruct_trajectory(run(pie, cfg))[1][-1, 0]
    t32 = run(pie, SimConfig(dt=cfg.dt, t_end=cfg.t_end, M=32, primal0=cfg.primal0))
    u32 = t32.disc.basis.interpolate(reconstruct_trajectory(t32)[1][-1, 0], SpectralBasis(16).nodes)
    assert np.max(np.abs(u16 - u32)) <= 1e-6


def test_series_reference():
    s = np.linspace(0, 1, 9)
    f = lambda x: np.sin(np.pi * x / 2)  # noqa: E731
    assert np.max(np.abs(heat_reference(0.0, s, f) - f(s))) <= 1e-6
    assert np.allclose(heat_reference(0.1, s, f), np.exp(-np.pi**2 / 4 * 0.1) * f(s), atol=1e-12)
    assert np.max(np.abs(heat_reference(50.0, s, f))) < 1e-12


def test_zero_dynamics_keep_state():
    m = GpdeModel.build((1,), A0=[[0]])
    pie = convert_gpde(m)
    traj = run(pie, SimConfig(dt=0.1, t_end=1, M=8, xf0=["s^2 + 1"]))
    assert np.max(np.abs(traj.x - traj.x[0])) <= 1e-14


def test_zero_trajectory_reconstructs_to_zero():
    model, cfg, _, _ = load_builtin("datko", full=True)
    pie = convert_gpde(model)
    traj = run(pie, SimConfig(dt=0.01, t_end=0.05, M=8))
    x, ch = reconstruct_trajectory(traj)
    assert np.all(x == 0) and np.all(ch == 0)


def test_missing_input_derivative_is_an_error():
    model, cfg, sig, _ = load_builtin("chemical_reactor", full=True)
    pie = convert_gpde(model)
    assert np.any(discretize_pie(pie, SpectralBasis(8)).mats["Tw"])
    with pytest.raises(SimulationError):
        run(pie, SimConfig(dt=0.01, t_end=0.1, M=8), w=SignalSpec("exp(-t)"))
    traj = run(pie, SimConfig(dt=0.01, t_end=0.1, M=8), w=sig["w"])
    assert np.all(np.isfinite(traj.z))


def test_primal_initial_profile_uses_continuity(heat):
    pie, cfg = heat
    disc = discretize_pie(pie, SpectralBasis(16))
    x0 = initial_state(disc, cfg)
    # second derivative of sin(pi s / 2)
    assert np.allclose(x0, -(np.pi / 2) ** 2 * np.sin(np.pi * disc.basis.nodes / 2), atol=1e-8)


def test_gain_row_quadrature():
    model = load_builtin("reaction_diffusion")
    disc = discretize_pie(convert_gpde(model), SpectralBasis(16))
    K = gain_row(disc, [[2.0]], [["s^2"]])
    state = disc.join_state([3.0], np.ones((1, 17)))
    assert K @ state == pytest.approx([6.0 + 1.0 / 3.0])


def test_reaction_diffusion_open_loop_growth_rate():
    model = load_builtin("reaction_diffusion")
    disc = discretize_pie(convert_gpde(model), SpectralBasis(24))
    ev = pencil_eigenvalues(disc)
    lead = ev[np.argmax(ev.real)]
    # lambda - pi^2 for the Dirichlet/Neumann-free reaction-diffusion mode
    assert lead.imag == pytest.approx(0, abs=1e-9)
    assert lead.real == pytest.approx(10 - np.pi**2, abs=1e-8)


def test_csv_round_trip(tmp_path, heat):
    pie, cfg = heat
    traj = run(pie, SimConfig(dt=0.01, t_end=0.05, M=8, primal0=cfg.primal0))
    write_outputs_csv(traj, tmp_path / "out.csv")
    head = (tmp_path / "out.csv").read_text().splitlines()[0]
    assert head == "t,energy"
    write_states_csv(traj, tmp_path / "states.csv")
    ts, nodes, steps = read_states_csv(tmp_path / "states.csv")
    assert np.array_equal(ts, traj.t)
    assert np.array_equal(nodes, traj.disc.basis.nodes)
    assert np.array_equal(steps[-1]["xf"].ravel(), traj.x[-1])


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(dt=0)
    with pytest.raises(ValueError):
        SimConfig(stride=0)
