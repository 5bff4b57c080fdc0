"""Cut-plan SVG export, stickers, supports and the bill of materials."""

import json
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from egg.fabrication import (FabricationError, bill_of_materials,
                             export_cut_plan, export_stickers,
                             export_supports, write_bom)
from egg.scaling import MATERIALS, LamellaSection

SECTION = LamellaSection(b=0.01, h=0.001, l=0.45)


def _path_xs(d):
    return [float(t) for t in re.findall(r"[ML] ([-\d.]+)", d)]


def test_cut_plan_roundtrip(dome_layout, tmp_path):
    svg = tmp_path / "plan.svg"
    plan = export_cut_plan(dome_layout, SECTION, path=str(svg))
    assert svg.exists()
    header = svg.read_text()
    assert "1 user unit = 1 mm" in header
    # every member becomes one part with its surface length in mm
    by_id = {p.member_id: p for p in plan.parts}
    for m in dome_layout.members:
        part = by_id[m.id]
        assert abs(part.length - m.length * 1000.0) < 0.1
        assert part.width == pytest.approx(10.0, abs=1e-9)
    # outline rectangles in the file reproduce the part lengths < 0.1 mm
    root = ET.fromstring(header)
    outlines = [el for el in root.iter()
                if el.get("data-kind") == "outline"]
    assert len(outlines) == len(plan.parts)
    for el in outlines:
        mid = int(el.get("data-member"))
        xs = _path_xs(el.get("d"))
        drawn = max(xs) - min(xs)
        assert abs(drawn - by_id[mid].length) < 0.1


def test_slot_positions(dome_layout):
    plan = export_cut_plan(dome_layout, SECTION)
    notch = {n.connection_id: n for n in dome_layout.notches}
    for c in dome_layout.connections:
        part = next(p for p in plan.parts if p.member_id == c.blue_id)
        target = c.s_blue_planar * 1000.0
        hit = min(part.slots, key=lambda s: abs(s[0] - target))
        assert abs(hit[0] - target) < 1e-6
        assert hit[1] == pytest.approx(
            notch[c.id].slot_length_blue * 1000.0, abs=1e-9)


def test_packing_no_overlap(dome_layout):
    plan = export_cut_plan(dome_layout, SECTION, sheet=(1000.0, 100.0))
    boxes = {}
    for pl in plan.placements:
        boxes.setdefault(pl.sheet, []).append(
            (pl.x, pl.y, pl.x + pl.part.length, pl.y + pl.part.width))
    n_placed = sum(len(v) for v in boxes.values())
    assert n_placed == len(plan.parts)
    for sheet, bs in boxes.items():
        for i in range(len(bs)):
            for j in range(i + 1, len(bs)):
                a, b = bs[i], bs[j]
                sep = (a[2] <= b[0] or b[2] <= a[0]
                       or a[3] <= b[1] or b[3] <= a[1])
                assert sep, (sheet, a, b)
        for x0, y0, x1, y1 in bs:
            assert x0 >= 0 and y0 >= 0 and x1 <= 1000.0 and y1 <= 100.0


def test_oversize_member_rejected(dome_layout):
    with pytest.raises(FabricationError):
        export_cut_plan(dome_layout, SECTION, sheet=(200.0, 600.0))


def test_kerf_compensation(dome_layout, tmp_path):
    f0 = tmp_path / "k0.svg"
    f2 = tmp_path / "k2.svg"
    export_cut_plan(dome_layout, SECTION, kerf=0.0, path=str(f0))
    export_cut_plan(dome_layout, SECTION, kerf=0.2, path=str(f2))

    def outline_span(path):
        root = ET.fromstring(path.read_text())
        el = next(e for e in root.iter() if e.get("data-kind") == "outline")
        xs = _path_xs(el.get("d"))
        return max(xs) - min(xs)

    # outline grows by the kerf (kerf/2 outward on each side)
    assert outline_span(f2) - outline_span(f0) == pytest.approx(0.2,
                                                                abs=1e-3)


def test_sticker_dimensions(dome_layout, tmp_path):
    plan = export_stickers(dome_layout, b=0.01,
                           path=str(tmp_path / "stickers.svg"))
    interior = [c for c in dome_layout.connections if not c.boundary]
    assert len(plan.stickers) == len(interior)
    notch = {n.connection_id: n for n in dome_layout.notches}
    for cid, w, h, r in plan.stickers:
        n = notch[cid]
        assert w == pytest.approx(10.0, abs=1e-9)
        expected_h = 10.0 + (abs(n.delta_blue) + abs(n.delta_pink)) * 1000.0
        assert h == pytest.approx(expected_h, abs=1e-9)
        assert r == pytest.approx(1.0, abs=1e-12)


def test_sticker_formula_synthetic():
    # a 10 mm lamella with 2 mm + 3 mm slide demands needs a
    # 10 x 15 mm sticker; zero demand gives the 10 x 10 mm overlap square
    class _N:
        connection_id = 0
        delta_blue = 0.002
        delta_pink = 0.003

    class _N0:
        connection_id = 1
        delta_blue = 0.0
        delta_pink = 0.0

    class _C:
        def __init__(self, cid):
            self.id = cid
            self.boundary = False

    class _L:
        notches = [_N(), _N0()]
        connections = [_C(0), _C(1)]

    plan = export_stickers(_L(), b=0.01)
    dims = {cid: (w, h) for cid, w, h, _ in plan.stickers}
    assert dims[0] == (10.0, 15.0)
    assert dims[1] == (10.0, 10.0)


def test_export_supports(dome_layout, tmp_path):
    out = tmp_path / "supports.json"
    specs = export_supports(dome_layout, path=str(out))
    data = json.loads(out.read_text())
    assert data["supports"] == specs
    assert len(specs) >= 4
    for s in specs:
        assert len(s["point"]) == 3 and len(s["normal"]) == 3
        assert 0.0 <= s["wedge_angle"] <= np.pi / 2 + 1e-12


def test_bom_formulas(dome_layout, tmp_path):
    mat = MATERIALS["limewood"]
    bom = bill_of_materials(dome_layout, SECTION, mat,
                            applied_load_kg=2.0)
    total = sum(m.length for m in dome_layout.members)
    assert bom.total_length_m == pytest.approx(total, rel=1e-12)
    assert bom.mass_kg == pytest.approx(total * 0.01 * 0.001 * 500.0,
                                        rel=1e-12)
    assert bom.screw_count == len(dome_layout.connections)
    assert bom.washer_count == 2 * bom.screw_count
    assert bom.weight_to_span == pytest.approx(
        bom.mass_kg / (bom.span_x_m * bom.span_y_m), rel=1e-12)
    assert bom.load_to_self_weight == pytest.approx(2.0 / bom.mass_kg,
                                                    rel=1e-12)
    out = tmp_path / "bom.json"
    write_bom(bom, str(out))
    data = json.loads(out.read_text())
    assert data["lamella_count"] == len(dome_layout.members)
    assert data["load_to_self_weight"] == pytest.approx(
        bom.load_to_self_weight)


def test_notches_required(dome_layout):
    import copy
    lay = copy.copy(dome_layout)
    lay.notches = []
    with pytest.raises(FabricationError):
        export_cut_plan(lay, SECTION)
    with pytest.raises(FabricationError):
        export_stickers(lay, b=0.01)
