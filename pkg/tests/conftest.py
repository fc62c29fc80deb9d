"""Shared builders and a session-wide solution cache.

The flagship configuration (cosine barrier of height and amplitude 20 on
a unit period, 80 half-shifted velocity channels, unit injection of the
slowest right-moving channel) is reused across many tests, and some of
its solves are expensive.  solve_cached shares them per session.
"""

import numpy as np
import pytest

from wignerdv import (
    build_mesh,
    build_system,
    build_velocity_grid,
    mono_energetic_boundary,
    new_potential,
    solve_bvp,
    solve_bvp_shooting,
)

BARRIER_COEFFS = (20.0, 20.0)
PERIOD = 1.0
M_CHANNELS = 40


def make_system(Nx: int, coeffs=BARRIER_COEFFS, i0: int = 0):
    """Flagship system on an Nx-cell mesh (optionally different coeffs)."""
    pot = new_potential(PERIOD, list(coeffs))
    grid = build_velocity_grid(pot.kappa, 0.5 * pot.kappa, M_CHANNELS, True)
    mesh = build_mesh(PERIOD, Nx)
    boundary = mono_energetic_boundary(grid, i0)
    return build_system(pot, grid, mesh, boundary)


@pytest.fixture(scope="session")
def solution_cache():
    """Maps (scheme, Nx, coeffs) to a solved DiscreteSolution."""
    cache = {}

    def get(scheme: str, Nx: int, coeffs=BARRIER_COEFFS):
        key = (scheme, Nx, tuple(coeffs))
        if key not in cache:
            system = make_system(Nx, coeffs)
            if scheme == "oracle":
                cache[key] = solve_bvp_shooting(system)
            else:
                cache[key] = solve_bvp(system, scheme)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260817)
