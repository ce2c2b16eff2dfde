"""Smoke tests for the python bindings: thin checks that the main operations
are wired through correctly, not a re-run of the C++ suites."""

import math
import os
import tempfile

import numpy as np
import pytest

import l1rom


def test_norms_and_tv():
    assert l1rom.l1_norm(np.array([1.0, -2.0, 3.0])) == 6.0
    grid = l1rom.Grid1D(0.0, 1.0, 4)
    field = l1rom.GridField(grid, np.array([1.0, 0.5, 0.0, 0.25]))
    assert l1rom.total_variation(field) == pytest.approx(1.25)


def test_advection_steady_profile():
    u = l1rom.solve_advection_steady(0.4, n_cells=500)
    vals = u.values
    assert vals[0] == pytest.approx(1.0, abs=2e-3)
    assert abs(vals[-1]) < 2e-3
    assert l1rom.advection_source(0.4, 0.4, 100.0) == pytest.approx(50.0)


def test_minimize_linear_median_instance():
    a = np.ones((3, 1))
    b = -np.array([1.0, 2.0, 10.0])
    lp = l1rom.minimize_linear(a, b, method="l1_lp")
    irls = l1rom.minimize_linear(a, b, method="l1_irls", eps_tol=1e-10)
    assert lp["q"][0] == pytest.approx(2.0, abs=1e-9)
    assert lp["objective"] == pytest.approx(9.0, abs=1e-9)
    assert irls["objective"] == pytest.approx(lp["objective"], rel=1e-6)


def test_burgers_rom_envelope():
    entries = [l1rom.solve_burgers(mu, n_cells=96, t_final=0.6) for mu in (0.2, 0.5, 0.9)]
    d = l1rom.build_dictionary(entries)
    traj = l1rom.rom_solve_unsteady_burgers(
        d, 0.4, method="l1_irls", constraint="unit_simplex", eps_tol=1e-8, perturb_eps=0.0
    )
    last = traj.reconstructed[-1].values
    members = np.stack([e.states[-1].values for e in d.entries])
    assert np.all(last >= members.min(axis=0) - 1e-6)
    assert np.all(last <= members.max(axis=0) + 1e-6)
    assert traj.steps[-1].projection_residual < 1.0


def test_dictionary_roundtrip(tmp_path):
    entries = [l1rom.solve_burgers(mu, n_cells=32, t_final=0.3) for mu in (0.3, 0.7)]
    d = l1rom.build_dictionary(entries)
    path = os.path.join(tmp_path, "dict.txt")
    l1rom.save_dictionary(d, path)
    loaded = l1rom.load_dictionary(path)
    assert len(loaded) == 2
    np.testing.assert_array_equal(loaded.time_grid, d.time_grid)
    np.testing.assert_array_equal(
        loaded.entries[1].states[-1].values, d.entries[1].states[-1].values
    )


def test_rank_and_pod():
    cols = np.zeros((50, 3))
    cols[:25, 0] = 1.0
    cols[25:, 1] = 1.0
    cols[:, 2] = cols[:, 0] + 2.0 * cols[:, 1]
    assert l1rom.numerical_rank(cols) == 2
    noisy = l1rom.perturb(cols, 1e-6, seed=1)
    assert l1rom.numerical_rank(noisy) == 3
    pod = l1rom.pod_compress(cols, 1e-8)
    assert pod.shape[1] == 2


def test_euler_initial_blend():
    grid = l1rom.Grid1D(0.0, 1.0, 16)
    u = l1rom.euler_initial(0.6, grid)
    rho, mom = u.component(0), u.component(1)
    assert rho[0] == pytest.approx(0.778)
    assert mom[0] / rho[0] == pytest.approx(0.2792)


def test_nozzle_area():
    area, darea = l1rom.nozzle_area(0.0)
    assert area == pytest.approx(2.5)
    assert darea == pytest.approx(-6.0)
    assert l1rom.nozzle_area(0.5)[0] == pytest.approx(1.0)
