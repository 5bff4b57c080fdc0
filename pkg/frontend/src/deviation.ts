import type { DeviationJson } from './types';

/**
 * Deviation readout and color ramp. Numbers are rendered verbatim as
 * received from the server — `String(x)` on a JSON-decoded double is the
 * shortest representation that round-trips, so no precision is invented
 * or dropped client-side.
 */

export interface DeviationReadout {
  nrmse: string;
  mean: string;
  samples: number;
  scale: string;
}

export function formatDeviation(dev: DeviationJson): DeviationReadout {
  return {
    nrmse: String(dev.nrmse),
    mean: String(dev.mean),
    samples: dev.n,
    scale: String(dev.f),
  };
}

/**
 * Map a deviation distance to an RGB color, normalized by lamella width:
 * green at 0, yellow at half a width, red at one width and beyond.
 */
export function deviationColor (
  distance: number,
  lamellaWidth: number,
): [number, number, number] {
  if (!(lamellaWidth > 0)) throw new Error('lamella width must be positive');
  const t = Math.min(Math.max(distance / lamellaWidth, 0), 1);
  if (t <= 0.5) {
    const u = t / 0.5; // green -> yellow
    return [Math.round(255 * u), 255, 0];
  }
  const u = (t - 0.5) / 0.5; // yellow -> red
  return [255, Math.round(255 * (1 - u)), 0];
}

/** Collapse banner text for a failed gravity-on run at scale f. */
export function collapseBanner(f: number, nrmseOn: number, nrmseOff: number): string {
  return (
    `collapse at f = ${f}: deviation jumped from ${String(nrmseOff)} ` +
    `(gravity off) to ${String(nrmseOn)} (gravity on)`
  );
}
