/**
 * Slider model for the planar corner angle, constrained to the feasible
 * intervals served by the backend. The model never invents values: any
 * requested position is clamped to the nearest point inside a served
 * interval before it is exposed or sent to the service.
 */

export type Interval = [number, number];

export class AlphaSlider {
  private current: number;

  constructor(private readonly intervals: Interval[]) {
    if (intervals.length === 0) {
      throw new Error('empty feasible domain: slider disabled');
    }
    for (const [lo, hi] of intervals) {
      if (!(lo <= hi)) throw new Error(`invalid interval [${lo}, ${hi}]`);
    }
    const [lo, hi] = intervals[0];
    this.current = (lo + hi) / 2;
  }

  get value(): number {
    return this.current;
  }

  get min(): number {
    return this.intervals[0][0];
  }

  get max(): number {
    return this.intervals[this.intervals.length - 1][1];
  }

  /** True when alpha lies inside one of the served intervals. */
  contains(alpha: number): boolean {
    return this.intervals.some(([lo, hi]) => lo <= alpha && alpha <= hi);
  }

  /** Nearest in-domain value to the requested one. */
  clamp(alpha: number): number {
    if (this.contains(alpha)) return alpha;
    let best = this.intervals[0][0];
    let dist = Infinity;
    for (const [lo, hi] of this.intervals) {
      for (const edge of [lo, hi]) {
        const d = Math.abs(alpha - edge);
        if (d < dist) {
          dist = d;
          best = edge;
        }
      }
    }
    return best;
  }

  /** Move the slider; returns the (clamped) value actually adopted. */
  set(alpha: number): number {
    this.current = this.clamp(alpha);
    return this.current;
  }

  /**
   * Quantized tick positions across the full span, keeping only ticks
   * that fall inside a served interval. Interval endpoints are always
   * included so narrow intervals are never skipped over.
   */
  ticks(n: number): number[] {
    if (n < 2) throw new Error('need at least 2 ticks');
    const out: number[] = [];
    const span = this.max - this.min;
    for (let i = 0; i < n; i++) {
      const a = this.min + (span * i) / (n - 1);
      if (this.contains(a)) out.push(a);
    }
    for (const [lo, hi] of this.intervals) {
      if (!out.includes(lo)) out.push(lo);
      if (!out.includes(hi)) out.push(hi);
    }
    return out.sort((a, b) => a - b);
  }

  /** Snap back after a server rejection, to the rejection's intervals. */
  snapBack(servedIntervals: Interval[]): number {
    const fresh = new AlphaSlider(servedIntervals);
    this.current = fresh.clamp(this.current);
    return this.current;
  }
}
