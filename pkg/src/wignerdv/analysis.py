"""Observables, mirror-symmetry diagnostics, refinement studies, CSV output.

The symmetry error measures how far a computed solution is from being
even in x.  It is the discrete L1 mirror defect

    e_sym = (kappa / 2) * dx * sum_{i,j} |f_{i,j} - f_{i,Nx-j}|,

i.e. each (channel, node) cell carries the phase-space measure
dx * kappa / 2, half the channel spacing.  Density and current are plain
channel sums, n_j = sum_i f_{i,j} and J_j = sum_i v_i f_{i,j}.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .fd import DiscreteSolution, Scheme, SolverError, solve_bvp
from .kinetic import WignerSystem, build_mesh
from .propagator import PropagatorError, solve_bvp_shooting

__all__ = [
    "density",
    "current",
    "symmetry_error",
    "scheme_difference",
    "StudyRow",
    "StudyReport",
    "convergence_study",
    "write_csv",
]


def density(sol: DiscreteSolution) -> np.ndarray:
    """Channel sum n_j = sum_i f_{i,j}, one value per mesh node."""
    return sol.values.sum(axis=0)


def current(sol: DiscreteSolution) -> np.ndarray:
    """Velocity-weighted channel sum J_j = sum_i v_i f_{i,j} per node."""
    return (sol.system.grid.velocities[:, None] * sol.values).sum(axis=0)


def symmetry_error(sol: DiscreteSolution) -> float:
    """Discrete L1 mirror defect of the solution, see module docstring.

    The mesh is mirror symmetric by construction, so node Nx - j sits at
    exactly -x_j and no interpolation is involved.
    """
    F = sol.values
    defect = np.abs(F - F[:, ::-1]).sum()
    dv = sol.system.grid.kappa
    return float(0.5 * dv * sol.system.mesh.dx * defect)


def scheme_difference(a: DiscreteSolution, b: DiscreteSolution) -> float:
    """L1 distance between two solutions on nesting meshes.

    Solutions must share the velocity grid; the finer mesh must be an
    integer refinement of the coarser.  The difference is integrated on
    the coarse nodes with the same cell measure as symmetry_error.

    Raises:
        ValueError: mismatched grids or non-nesting meshes.
    """
    ga, gb = a.system.grid, b.system.grid
    if ga.size != gb.size or not math.isclose(ga.s, gb.s) or not math.isclose(ga.kappa, gb.kappa):
        raise ValueError("solutions use different velocity grids")
    coarse, fine = (a, b) if a.system.mesh.Nx <= b.system.mesh.Nx else (b, a)
    n_c = coarse.system.mesh.Nx
    n_f = fine.system.mesh.Nx
    if n_f % n_c != 0:
        raise ValueError(f"meshes with Nx={n_c} and Nx={n_f} do not nest")
    stride = n_f // n_c
    diff = np.abs(coarse.values - fine.values[:, ::stride]).sum()
    dv = ga.kappa
    return float(0.5 * dv * coarse.system.mesh.dx * diff)


@dataclass(frozen=True)
class StudyRow:
    """One (scheme, mesh) record of a refinement study.

    A failed solve records nan for the symmetry error and whatever
    residual the solver reported.
    """

    scheme: str
    Nx: int
    symmetry_error: float
    runtime_s: float
    residual: float


@dataclass(frozen=True)
class StudyReport:
    """Ordered collection of refinement-study rows."""

    rows: tuple


def convergence_study(system: WignerSystem, scheme, Nx_list, rel_tol: float = 1e-12) -> StudyReport:
    """Solve one scheme across a list of mesh sizes and collect errors.

    The system is rebuilt on each mesh; potential, velocity grid and
    boundary data are shared.  Solver failures are recorded in the row
    (symmetry_error = nan) instead of aborting the remaining meshes.
    ``scheme`` accepts the finite-difference Scheme values or "oracle".

    Raises:
        ValueError: empty Nx_list or an invalid mesh size.
    """
    nx_values = [int(n) for n in Nx_list]
    if not nx_values:
        raise ValueError("Nx_list must not be empty")
    for nx in nx_values:
        if nx < 2 or nx % 2 != 0:
            raise ValueError(f"mesh size Nx={nx} must be an even integer >= 2")
    scheme_tag = scheme if isinstance(scheme, str) else Scheme(scheme).value
    if scheme_tag != "oracle":
        scheme_tag = Scheme(scheme_tag).value
    rows = []
    for nx in nx_values:
        mesh = build_mesh(system.potential.period_l, nx)
        sys_n = replace(system, mesh=mesh)
        t0 = time.perf_counter()
        try:
            if scheme_tag == "oracle":
                sol = solve_bvp_shooting(sys_n)
            else:
                sol = solve_bvp(sys_n, scheme_tag, rel_tol=rel_tol)
            runtime = time.perf_counter() - t0
            rows.append(
                StudyRow(
                    scheme=scheme_tag,
                    Nx=nx,
                    symmetry_error=symmetry_error(sol),
                    runtime_s=runtime,
                    residual=sol.residual,
                )
            )
        except (SolverError, PropagatorError) as exc:
            runtime = time.perf_counter() - t0
            residual = getattr(exc, "residual", float("nan"))
            rows.append(
                StudyRow(
                    scheme=scheme_tag,
                    Nx=nx,
                    symmetry_error=float("nan"),
                    runtime_s=runtime,
                    residual=float(residual),
                )
            )
    return StudyReport(rows=tuple(rows))


def _fmt(x: float) -> str:
    """17 significant digits, enough for exact float round trips."""
    return format(float(x), ".17g")


def write_csv(obj, path) -> None:
    """Write a solution, a study report, or an (x, value) profile as CSV.

    DiscreteSolution: header "x, v, f", node-major rows.
    StudyReport: header "scheme, Nx, symmetry_error, runtime_s, residual".
    (x, value) pair of equal-length 1-D arrays: header "x, value".
    Floats carry 17 significant digits so parsing them back is exact.
    """
    lines = []
    if isinstance(obj, DiscreteSolution):
        lines.append("x, v, f")
        xs = obj.system.mesh.nodes
        vs = obj.system.grid.velocities
        F = obj.values
        for j in range(xs.size):
            xj = _fmt(xs[j])
            for i in range(vs.size):
                lines.append(f"{xj}, {_fmt(vs[i])}, {_fmt(F[i, j])}")
    elif isinstance(obj, StudyReport):
        lines.append("scheme, Nx, symmetry_error, runtime_s, residual")
        for row in obj.rows:
            lines.append(
                f"{row.scheme}, {row.Nx}, {_fmt(row.symmetry_error)}, "
                f"{_fmt(row.runtime_s)}, {_fmt(row.residual)}"
            )
    elif isinstance(obj, tuple) and len(obj) == 2:
        x, val = np.asarray(obj[0], dtype=float), np.asarray(obj[1], dtype=float)
        if x.ndim != 1 or x.shape != val.shape:
            raise ValueError("profile must be a pair of equal-length 1-D arrays")
        lines.append("x, value")
        for j in range(x.size):
            lines.append(f"{_fmt(x[j])}, {_fmt(val[j])}")
    else:
        raise TypeError(f"cannot serialize object of type {type(obj).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
