"""Distance maps, matched member curves, and the feasible angle domain."""

import numpy as np
import pytest

from egg.cladding import (CladdingError, matched_curves,
                          planar_distance_evaluator, surface_distance_map)
from egg.mesh import MeshPoint
from egg.patch import build_patch, build_planar_quad


def test_planar_evaluator_exact():
    q = build_planar_quad([1, 1, 1, 1], np.pi / 2)
    ev = planar_distance_evaluator(q, "blue")
    # blue members run from side 4 to side 2: on the unit square those
    # are the left and right edges, so the distance is hypot(1, du)
    for u1 in (0.0, 0.25, 0.6, 1.0):
        for u2 in (0.0, 0.3, 0.75, 1.0):
            assert ev(u1, u2) == pytest.approx(np.hypot(1.0, u2 - u1),
                                               abs=1e-12)
    ev_p = planar_distance_evaluator(q, "pink")
    assert ev_p(0.5, 0.5) == pytest.approx(1.0, abs=1e-12)


def test_unknown_family_rejected(dome_patch):
    q = build_planar_quad([1, 1, 1, 1], np.pi / 2)
    with pytest.raises(CladdingError):
        planar_distance_evaluator(q, "green")
    with pytest.raises(CladdingError):
        surface_distance_map(dome_patch, "green", n=17)


def test_flat_patch_degenerate_flagged(flat_grid):
    corners = [MeshPoint.locate(flat_grid, np.array([x, y, 0.0]))
               for x, y in [(0.1, 0.1), (0.9, 0.1), (0.9, 0.9), (0.1, 0.9)]]
    p = build_patch(flat_grid, corners)
    D = surface_distance_map(p, "blue", n=17)
    q = build_planar_quad(p.side_lengths, np.pi / 2)
    with pytest.raises(CladdingError, match="degenerate"):
        matched_curves(D, planar_distance_evaluator(q, "blue"), np.pi / 2)


def test_dome_curves_monotone_equal_length(dome_claddings, dome_quad):
    for fam in ("blue", "pink"):
        c = dome_claddings[fam]
        d = np.diff(c.u2)
        assert np.all(d > 0) or np.all(d < 0)
        # matched members have equal surface and planar lengths
        ev = planar_distance_evaluator(dome_quad, fam)
        for u1, u2, length in zip(c.u1[::4], c.u2[::4], c.lengths[::4]):
            assert ev(u1, u2) == pytest.approx(length, rel=1e-6)


def test_surface_map_cache_roundtrip(dome_patch, tmp_path):
    d1 = surface_distance_map(dome_patch, "blue", n=17,
                              cache_dir=str(tmp_path))
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    d2 = surface_distance_map(dome_patch, "blue", n=17,
                              cache_dir=str(tmp_path))
    np.testing.assert_array_equal(d1.samples, d2.samples)
    assert d2.family == "blue"


def test_cache_env_var(dome_patch, tmp_path, monkeypatch):
    monkeypatch.setenv("EGG_CACHE_DIR", str(tmp_path))
    surface_distance_map(dome_patch, "pink", n=17)
    assert len(list(tmp_path.iterdir())) == 1


def test_cache_rejects_mismatch(dome_patch, tmp_path):
    surface_distance_map(dome_patch, "blue", n=17, cache_dir=str(tmp_path))
    f = next(tmp_path.iterdir())
    # corrupt the magic header: loader must fall through to recompute
    data = bytearray(f.read_bytes())
    data[:8] = b"NOTAMAP0"
    f.write_bytes(bytes(data))
    d = surface_distance_map(dome_patch, "blue", n=17,
                             cache_dir=str(tmp_path))
    assert d.samples.shape == (17, 17)


def test_alpha_domain_dome(dome_patch, dome_alpha, tmp_path):
    from egg.cladding import feasible_alpha_domain
    dom = feasible_alpha_domain(dome_patch, n_alpha=16, n_map=33,
                                cache_dir=str(tmp_path))
    assert dom.contains(dome_alpha)
    for lo, hi in dom.intervals:
        assert 0.0 < lo <= hi < np.pi
    # every rejected sample carries a diagnostic reason
    ok = {i for i, a in enumerate(dom.alphas)
          if any(lo <= a <= hi for lo, hi in dom.intervals)}
    for i in range(len(dom.alphas)):
        if i not in ok:
            assert i in dom.diagnostics
