import type { LayoutResponse, MemberJson } from './types';

/**
 * Planar layout preview on a 2D canvas. Draws exactly the geometry the
 * server returned: the planar quad outline and each member's planar
 * segment, colored by family.
 */

const FAMILY_COLORS: Record<MemberJson['family'], string> = {
  blue: '#2563eb',
  pink: '#db2777',
};

export function drawPlanarPreview(
  ctx: CanvasRenderingContext2D,
  layout: LayoutResponse,
  width: number,
  height: number,
): void {
  const pts = layout.quad.vertices;
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const pad = 20;
  const sx = (width - 2 * pad) / (Math.max(...xs) - Math.min(...xs) || 1);
  const sy = (height - 2 * pad) / (Math.max(...ys) - Math.min(...ys) || 1);
  const s = Math.min(sx, sy);
  const x0 = Math.min(...xs);
  const y0 = Math.min(...ys);
  const toCanvas = (p: number[]): [number, number] => [
    pad + (p[0] - x0) * s,
    height - pad - (p[1] - y0) * s,
  ];

  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = '#374151';
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  pts.forEach((p, i) => {
    const [cx, cy] = toCanvas(p);
    if (i === 0) ctx.moveTo(cx, cy);
    else ctx.lineTo(cx, cy);
  });
  ctx.closePath();
  ctx.stroke();

  for (const member of layout.layout.members) {
    ctx.strokeStyle = FAMILY_COLORS[member.family];
    ctx.lineWidth = member.boundary ? 2.5 : 1;
    const [ax, ay] = toCanvas(member.planar_start);
    const [bx, by] = toCanvas(member.planar_end);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.stroke();
  }
}
