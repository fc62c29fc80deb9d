"""Observables, symmetry error, refinement studies, CSV round trips."""

import math
from dataclasses import replace

import numpy as np
import pytest

from wignerdv import (
    DiscreteSolution,
    Scheme,
    StudyReport,
    StudyRow,
    convergence_study,
    current,
    density,
    scheme_difference,
    solve_bvp,
    symmetry_error,
    write_csv,
)

from conftest import make_system


def _hand_solution(system, F):
    F = np.asarray(F, dtype=float)
    return DiscreteSolution(values=F, system=system, scheme="central", residual=0.0)


def test_density_and_current_free_streaming():
    system = make_system(10, coeffs=(0.0,))
    sol = solve_bvp(system, Scheme.CENTRAL)
    # only the injected channel is occupied: density 1, current v_0
    assert density(sol) == pytest.approx(np.ones(11), abs=1e-13)
    v0 = 0.5 * system.grid.kappa
    assert current(sol) == pytest.approx(np.full(11, v0), abs=1e-12)


def test_density_of_symmetric_solution_is_even(solution_cache):
    sol = solution_cache("central", 100)
    n = density(sol)
    assert np.abs(n - n[::-1]).max() < 1e-10


def test_current_is_conserved_by_cell_scheme(solution_cache):
    sol = solution_cache("central", 100)
    J = current(sol)
    assert np.abs(J - J[0]).max() / abs(J[0]) < 1e-10


def test_current_deviation_shrinks_for_one_sided_scheme(solution_cache):
    devs = []
    for nx in (100, 400, 1600):
        J = current(solution_cache("upwind2", nx))
        devs.append(np.abs(J - J[0]).max() / abs(J[0]))
    assert devs[0] > devs[1] > devs[2]


def test_symmetry_error_of_even_field_is_zero():
    system = make_system(8)
    m = system.grid.size
    F = np.cos(2.0 * math.pi * system.mesh.nodes)[None, :] * np.ones((m, 1))
    assert symmetry_error(_hand_solution(system, F)) == 0.0


def test_symmetry_error_hand_value():
    # Nx = 2 on a unit period: dx = 0.5, velocity weight kappa/2.
    # A single unit entry at the left node mirrors onto the right node:
    # |1 - 0| dx + |0 - 1| dx = 1, scaled by kappa/2.
    system = make_system(2)
    m = system.grid.size
    F = np.zeros((m, 3))
    F[0, 0] = 1.0
    e = symmetry_error(_hand_solution(system, F))
    assert e == pytest.approx(0.5 * math.pi * 1.0, rel=1e-14)


def test_symmetry_error_center_column_drops_out():
    system = make_system(4)
    m = system.grid.size
    F = np.zeros((m, 5))
    F[3, 2] = 7.0  # the center node mirrors onto itself
    assert symmetry_error(_hand_solution(system, F)) == 0.0


def test_scheme_difference_identical_is_zero(solution_cache):
    sol = solution_cache("central", 100)
    assert scheme_difference(sol, sol) == 0.0


def test_scheme_difference_requires_nesting_meshes():
    a = solve_bvp(make_system(10), Scheme.UPWIND1)
    b = solve_bvp(make_system(16), Scheme.UPWIND1)
    with pytest.raises(ValueError):
        scheme_difference(a, b)


def test_scheme_difference_on_nested_meshes(solution_cache):
    coarse = solution_cache("central", 100)
    fine = solution_cache("central", 400)
    d = scheme_difference(coarse, fine)
    assert 0.0 < d < 0.1
    # order of arguments must not matter
    assert scheme_difference(fine, coarse) == pytest.approx(d, rel=1e-14)


def test_scheme_difference_rejects_different_grids():
    a = solve_bvp(make_system(10), Scheme.UPWIND1)
    sys_b = make_system(10)
    from wignerdv import build_system, build_velocity_grid, mono_energetic_boundary

    small_grid = build_velocity_grid(sys_b.potential.kappa, 0.5 * sys_b.potential.kappa, 20, True)
    sys_small = build_system(
        sys_b.potential, small_grid, sys_b.mesh, mono_energetic_boundary(small_grid, 0)
    )
    b = solve_bvp(sys_small, Scheme.UPWIND1)
    with pytest.raises(ValueError):
        scheme_difference(a, b)


def test_convergence_study_zero_potential():
    system = make_system(4, coeffs=(0.0,))
    report = convergence_study(system, Scheme.UPWIND1, [2, 4])
    assert [row.Nx for row in report.rows] == [2, 4]
    for row in report.rows:
        assert row.scheme == "upwind1"
        assert row.symmetry_error < 1e-13
        assert row.runtime_s >= 0.0
        assert row.residual <= 1e-12


def test_convergence_study_rejects_bad_requests():
    with pytest.raises(ValueError):
        convergence_study(make_system(4), Scheme.UPWIND1, [])
    with pytest.raises(ValueError):
        convergence_study(make_system(4), Scheme.UPWIND1, [4, 7])


def test_convergence_study_records_failures_per_row(monkeypatch):
    # a solver failure on one mesh must not abort the others
    import wignerdv.analysis as analysis_mod
    from wignerdv import SolverError as SErr

    real = analysis_mod.solve_bvp

    def flaky(system, scheme, rel_tol=1e-12, **kw):
        if system.mesh.Nx == 8:
            raise SErr("synthetic failure", residual=0.5)
        return real(system, scheme, rel_tol=rel_tol, **kw)

    monkeypatch.setattr(analysis_mod, "solve_bvp", flaky)
    report = convergence_study(make_system(4), Scheme.UPWIND1, [4, 8, 12])
    assert len(report.rows) == 3
    assert not math.isnan(report.rows[0].symmetry_error)
    assert math.isnan(report.rows[1].symmetry_error)
    assert report.rows[1].residual == 0.5
    assert not math.isnan(report.rows[2].symmetry_error)


def test_convergence_study_accepts_oracle():
    system = make_system(4)
    report = convergence_study(system, "oracle", [10])
    row = report.rows[0]
    assert row.scheme == "oracle"
    assert row.symmetry_error < 1e-7


def test_write_csv_solution_round_trip(tmp_path):
    system = make_system(4)
    sol = solve_bvp(system, Scheme.CENTRAL)
    path = tmp_path / "solution.csv"
    write_csv(sol, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x, v, f"
    assert len(lines) == 1 + system.grid.size * (system.mesh.Nx + 1)
    # node-major ordering with exact float round trip
    first = lines[1].split(", ")
    assert float(first[0]) == system.mesh.nodes[0]
    assert float(first[1]) == system.grid.velocities[0]
    assert float(first[2]) == sol.values[0, 0]
    last = lines[-1].split(", ")
    assert float(last[0]) == system.mesh.nodes[-1]
    assert float(last[1]) == system.grid.velocities[-1]
    assert float(last[2]) == sol.values[-1, -1]


def test_write_csv_study_round_trip(tmp_path):
    rows = (
        StudyRow(scheme="upwind1", Nx=100, symmetry_error=0.5, runtime_s=0.125, residual=1e-14),
        StudyRow(scheme="central", Nx=400, symmetry_error=1e-13, runtime_s=2.5, residual=3e-15),
    )
    path = tmp_path / "report.csv"
    write_csv(StudyReport(rows=rows), path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "scheme, Nx, symmetry_error, runtime_s, residual"
    parts = lines[1].split(", ")
    assert parts[0] == "upwind1"
    assert int(parts[1]) == 100
    assert float(parts[2]) == 0.5
    assert float(parts[4]) == 1e-14


def test_write_csv_profile(tmp_path):
    x = np.linspace(-0.5, 0.5, 11)
    val = np.sin(x)
    path = tmp_path / "density.csv"
    write_csv((x, val), path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x, value"
    assert len(lines) == 12
    got = np.array([[float(p) for p in line.split(", ")] for line in lines[1:]])
    assert np.all(got[:, 0] == x)
    assert np.all(got[:, 1] == val)


def test_write_csv_rejects_unknown_objects(tmp_path):
    with pytest.raises(TypeError):
        write_csv({"not": "supported"}, tmp_path / "x.csv")
    with pytest.raises(ValueError):
        write_csv((np.zeros(3), np.zeros(4)), tmp_path / "y.csv")


def test_solution_has_negative_regions(solution_cache):
    # the distribution is a quasi-probability: interference makes it dip
    # below zero somewhere even though all inflow data is nonnegative
    sol = solution_cache("central", 100)
    assert sol.values.min() < 0.0


def test_scattering_occupies_fast_channels(solution_cache):
    # coupling moves weight to channels faster than the injected one
    sol = solution_cache("central", 100)
    grid = sol.system.grid
    v0 = grid.velocities[grid.position_of(0)]
    fast = np.abs(grid.velocities) > v0
    assert np.abs(sol.values[fast]).max() > 1e-6


def test_second_order_schemes_cluster_together(solution_cache):
    # on the same mesh the two second-order solutions are far closer to
    # each other than either is to the diffusive first-order one
    up2 = solution_cache("upwind2", 100)
    up1 = solution_cache("upwind1", 100)
    cen = solution_cache("central", 100)
    d_second = scheme_difference(cen, up2)
    d_first = scheme_difference(cen, up1)
    assert 0.0 < d_second < d_first
