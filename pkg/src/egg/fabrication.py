"""Laser-cut plan export, slide-sticker outlines, support specs and BOM.

All vector output is SVG with 1 user unit = 1 mm (stated in a header
comment of every file).  Geometry inside this module is handled in
millimetres; the rest of the package works in metres.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FabricationError", "CutPart", "SheetPlacement", "CutPlan",
    "StickerPlan", "BillOfMaterials",
    "export_cut_plan", "export_stickers", "export_supports",
    "bill_of_materials", "write_bom",
]

MM = 1000.0  # metres -> millimetres


class FabricationError(ValueError):
    pass


# -- cut plan ------------------------------------------------------------------


@dataclass
class CutPart:
    """One lamella blank: a rectangle with stadium slots / round holes.

    ``length`` and ``width`` are the finished-part dimensions in mm
    (kerf compensation is applied only when writing the vector file).
    Slots are (center_x_mm, slot_length_mm, slot_width_mm); a slot whose
    length equals its width degenerates to a round hole.
    """

    member_id: int
    family: str
    length: float
    width: float
    slots: list = field(default_factory=list)


@dataclass
class SheetPlacement:
    part: CutPart
    sheet: int
    x: float  # lower-left corner on the sheet, mm
    y: float


@dataclass
class CutPlan:
    parts: list
    placements: list
    sheet: tuple
    kerf: float
    sheets_used: int


def _member_slots(layout, member) -> list:
    """(arc position mm, slot length mm, slot width mm) per connection
    crossing this member, measured along the planar (fabrication) state."""
    notch = {n.connection_id: n for n in (layout.notches or [])}
    if not notch:
        raise FabricationError("compute notches before exporting")
    out = []
    for c in layout.connections:
        if c.blue_id == member.id:
            s, ln = c.s_blue_planar, notch[c.id].slot_length_blue
        elif c.pink_id == member.id:
            s, ln = c.s_pink_planar, notch[c.id].slot_length_pink
        else:
            continue
        out.append((s * MM, ln * MM, notch[c.id].slot_width * MM))
    out.sort()
    return out


def export_cut_plan(layout, section, sheet=(1200.0, 600.0),
                    kerf: float = 0.0, spacing: float = 5.0,
                    path=None) -> CutPlan:
    """Cut plan for every member: rectangle length x b with slot
    sub-paths at the planar connection arc positions.

    ``sheet`` is (width, height) in mm.  Parts are strip-packed greedily,
    longest first.  A member longer than the sheet is an error; splicing
    is deliberately not automated.  When ``path`` is given an SVG file is
    written; kerf compensation offsets the outline outward and the holes
    inward by ``kerf / 2``.
    """
    b_mm = section.b * MM
    parts = []
    for m in layout.members:
        parts.append(CutPart(member_id=m.id, family=m.family,
                             length=m.length * MM, width=b_mm,
                             slots=_member_slots(layout, m)))
    sw, sh = float(sheet[0]), float(sheet[1])
    for p in parts:
        if p.length > sw or p.width > sh:
            raise FabricationError(
                f"member {p.member_id} ({p.length:.1f} mm) does not fit "
                f"the {sw:.0f} x {sh:.0f} mm sheet; split it manually")
    # first-fit-decreasing strip packing: rows on sheets
    order = sorted(parts, key=lambda p: -p.length)
    placements = []
    rows = []  # (sheet, y, height, x_cursor)
    sheets = 1
    y_cursor = {0: 0.0}
    for p in order:
        placed = False
        for row in rows:
            if (row["x"] + p.length <= sw
                    and p.width <= row["height"]):
                placements.append(SheetPlacement(p, row["sheet"],
                                                 row["x"], row["y"]))
                row["x"] += p.length + spacing
                placed = True
                break
        if placed:
            continue
        # open a new row on the first sheet with room, else a new sheet
        for s in range(sheets + 1):
            if s == sheets:
                sheets += 1
                y_cursor[s] = 0.0
            if y_cursor[s] + p.width <= sh:
                row = {"sheet": s, "y": y_cursor[s], "height": p.width,
                       "x": p.length + spacing}
                y_cursor[s] += p.width + spacing
                rows.append(row)
                placements.append(SheetPlacement(p, s, 0.0, row["y"]))
                break
    plan = CutPlan(parts=parts, placements=placements, sheet=(sw, sh),
                   kerf=kerf, sheets_used=sheets)
    if path is not None:
        _write_cut_svg(plan, path)
    return plan


def _stadium_path(cx, cy, length, width) -> str:
    """SVG path of a stadium (slot) centred at (cx, cy), long axis x."""
    r = width / 2.0
    half = max(length / 2.0 - r, 0.0)
    x0, x1 = cx - half, cx + half
    return (f"M {x0:.4f} {cy - r:.4f} "
            f"L {x1:.4f} {cy - r:.4f} "
            f"A {r:.4f} {r:.4f} 0 0 1 {x1:.4f} {cy + r:.4f} "
            f"L {x0:.4f} {cy + r:.4f} "
            f"A {r:.4f} {r:.4f} 0 0 1 {x0:.4f} {cy - r:.4f} Z")


def _rect_path(x, y, w, h) -> str:
    return (f"M {x:.4f} {y:.4f} L {x + w:.4f} {y:.4f} "
            f"L {x + w:.4f} {y + h:.4f} L {x:.4f} {y + h:.4f} Z")


_SVG_HEADER = ('<?xml version="1.0" encoding="UTF-8"?>\n'
               "<!-- units: 1 user unit = 1 mm -->\n")


def _svg(width, height, body) -> str:
    return (_SVG_HEADER
            + f'<svg xmlns="http://www.w3.org/2000/svg" '
              f'width="{width:.1f}mm" height="{height:.1f}mm" '
              f'viewBox="0 0 {width:.4f} {height:.4f}">\n'
            + body + "</svg>\n")


def _write_cut_svg(plan: CutPlan, path):
    sw, sh = plan.sheet
    k = plan.kerf / 2.0
    total_h = plan.sheets_used * (sh + 20.0)
    rows = []
    for pl in plan.placements:
        oy = pl.sheet * (sh + 20.0)
        p = pl.part
        rows.append(f'<path fill="none" stroke="black" stroke-width="0.1" '
                    f'data-member="{p.member_id}" data-kind="outline" d="'
                    + _rect_path(pl.x - k, oy + pl.y - k,
                                 p.length + 2 * k, p.width + 2 * k)
                    + '"/>')
        for s, ln, wd in p.slots:
            rows.append(
                f'<path fill="none" stroke="red" stroke-width="0.1" '
                f'data-member="{p.member_id}" data-kind="slot" d="'
                + _stadium_path(pl.x + s, oy + pl.y + p.width / 2.0,
                                max(ln - 2 * k, 0.1),
                                max(wd - 2 * k, 0.1))
                + '"/>')
    with open(path, "w") as fh:
        fh.write(_svg(sw, total_h, "\n".join(rows) + "\n"))


# -- stickers ------------------------------------------------------------------


@dataclass
class StickerPlan:
    stickers: list  # (connection_id, width_mm, height_mm, corner_radius_mm)


def export_stickers(layout, b: float, path=None) -> StickerPlan:
    """Low-friction sticker outlines, one per interior connection.

    Each sticker covers the lamella overlap square plus the full slot
    travel: b x (b + |delta_blue| + |delta_pink|), corner radius b/10.
    """
    if not layout.notches:
        raise FabricationError("compute notches before exporting")
    b_mm = b * MM
    stickers = []
    for n in layout.notches:
        conn = next(c for c in layout.connections
                    if c.id == n.connection_id)
        if conn.boundary:
            continue
        h = b_mm + (abs(n.delta_blue) + abs(n.delta_pink)) * MM
        stickers.append((n.connection_id, b_mm, h, b_mm / 10.0))
    plan = StickerPlan(stickers=stickers)
    if path is not None:
        _write_sticker_svg(plan, path)
    return plan


def _write_sticker_svg(plan: StickerPlan, path):
    gap = 4.0
    x = gap
    height = gap
    rows = []
    for cid, w, h, r in plan.stickers:
        rows.append(f'<rect fill="none" stroke="black" stroke-width="0.1" '
                    f'data-connection="{cid}" x="{x:.4f}" y="{gap:.4f}" '
                    f'width="{w:.4f}" height="{h:.4f}" rx="{r:.4f}"/>')
        x += w + gap
        height = max(height, h + 2 * gap)
    with open(path, "w") as fh:
        fh.write(_svg(x, height, "\n".join(rows) + "\n"))


# -- supports ------------------------------------------------------------------


def export_supports(layout, path=None) -> list:
    """Support anchor specs: point, tangent-plane normal, wedge angle."""
    out = [s.to_json() for s in layout.supports]
    if path is not None:
        with open(path, "w") as fh:
            json.dump({"supports": out}, fh, indent=2)
    return out


# -- bill of materials ---------------------------------------------------------


@dataclass
class BillOfMaterials:
    lamella_count: int
    total_length_m: float
    mass_kg: float
    screw_count: int
    washer_count: int
    support_count: int
    span_x_m: float
    span_y_m: float
    weight_to_span: float        # kg / m^2 of plan projection
    thickness_to_span: float     # section h over max span
    load_to_self_weight: float | None = None

    def to_json(self):
        d = {k: getattr(self, k) for k in (
            "lamella_count", "total_length_m", "mass_kg", "screw_count",
            "washer_count", "support_count", "span_x_m", "span_y_m",
            "weight_to_span", "thickness_to_span")}
        if self.load_to_self_weight is not None:
            d["load_to_self_weight"] = self.load_to_self_weight
        return d


def bill_of_materials(layout, section, material, deployed=None,
                      applied_load_kg: float | None = None
                      ) -> BillOfMaterials:
    """Mass and benchmark ratios of the grid.

    Spans come from the deployed state's plan projection when available,
    else from the planar layout.  ``weight_to_span`` divides the mass by
    the projected span rectangle; ``thickness_to_span`` is the lamella
    thickness over the larger span.
    """
    total_len = sum(m.length for m in layout.members)
    mass = total_len * section.b * section.h * material.rho
    if deployed is not None:
        pts = deployed.all_points()
        span = np.ptp(pts[:, :2], axis=0)
    else:
        pts = np.array([p for m in layout.members
                        for p in (m.planar_start, m.planar_end)])
        span = np.ptp(pts, axis=0)
    span_x, span_y = float(span[0]), float(span[1])
    ratio = None
    if applied_load_kg is not None and applied_load_kg > 0:
        ratio = applied_load_kg / mass
    return BillOfMaterials(
        lamella_count=len(layout.members),
        total_length_m=total_len,
        mass_kg=mass,
        screw_count=len(layout.connections),
        washer_count=2 * len(layout.connections),
        support_count=len(layout.supports),
        span_x_m=span_x, span_y_m=span_y,
        weight_to_span=mass / (span_x * span_y),
        thickness_to_span=section.h / max(span_x, span_y),
        load_to_self_weight=ratio)


def write_bom(bom: BillOfMaterials, path):
    with open(path, "w") as fh:
        json.dump(bom.to_json(), fh, indent=2)
