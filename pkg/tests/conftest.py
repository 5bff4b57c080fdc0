"""Shared fixtures: meshes, patches and the dome pipeline stages.

Expensive stages (patch, distance maps, layout) are session-scoped and
built once; tests must not mutate them.
"""

import numpy as np
import pytest

from egg.cladding import (matched_curves, planar_distance_evaluator,
                          surface_distance_map)
from egg.layout import compute_notches, generate_layout, place_supports
from egg.mesh import MeshPoint
from egg.patch import build_patch, build_planar_quad, feasibility_check
from egg.synth import dome_mesh, grid_mesh, icosphere

DOME_CORNERS_XY = [(0.06, 0.08), (0.37, 0.08), (0.37, 0.49), (0.06, 0.49)]


@pytest.fixture(scope="session")
def dome():
    return dome_mesh(n=25)


@pytest.fixture(scope="session")
def dome_patch(dome):
    picks = [MeshPoint.locate(dome, np.array([x, y, 0.05]))
             for x, y in DOME_CORNERS_XY]
    return build_patch(dome, picks)


@pytest.fixture(scope="session")
def dome_alpha(dome_patch):
    res = feasibility_check(dome_patch, n_samples=50)
    lo, hi = res.feasible_intervals[0]
    return 0.5 * (lo + hi)


@pytest.fixture(scope="session")
def dome_quad(dome_patch, dome_alpha):
    return build_planar_quad(dome_patch.side_lengths, dome_alpha)


@pytest.fixture(scope="session")
def dome_claddings(dome_patch, dome_quad, dome_alpha, tmp_path_factory):
    cache = tmp_path_factory.mktemp("maps")
    curves = {}
    for fam in ("blue", "pink"):
        dmap = surface_distance_map(dome_patch, fam, n=33,
                                    cache_dir=str(cache))
        curves[fam] = matched_curves(
            dmap, planar_distance_evaluator(dome_quad, fam), dome_alpha)
    return curves


@pytest.fixture(scope="session")
def dome_layout(dome_patch, dome_quad, dome_claddings):
    lay = generate_layout(dome_patch, dome_quad, dome_claddings["blue"],
                          dome_claddings["pink"], counts=(4, 4))
    compute_notches(lay)
    place_supports(lay, dome_patch, min_count=4)
    return lay


@pytest.fixture(scope="session")
def flat_grid():
    return grid_mesh(21, 21, 1.0, 1.0)


@pytest.fixture(scope="session")
def sphere320():
    return icosphere(subdivisions=2, radius=1.0)
