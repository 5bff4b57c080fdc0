import { describe, expect, it } from 'vitest';
import { collapseBanner, deviationColor, formatDeviation } from '../src/deviation';

describe('formatDeviation', () => {
  it('renders served numbers verbatim (round-trip exact)', () => {
    const dev = { nrmse: 0.005828123456789, mean: 0.00213456789, n: 321, f: 2.5 };
    const out = formatDeviation(dev);
    expect(out.nrmse).toBe('0.005828123456789');
    expect(Number(out.nrmse)).toBe(dev.nrmse);
    expect(Number(out.mean)).toBe(dev.mean);
    expect(out.samples).toBe(321);
    expect(out.scale).toBe('2.5');
  });

  it('does not truncate extreme values', () => {
    const out = formatDeviation({ nrmse: 1.23e-12, mean: 9.87e8, n: 1, f: 1 });
    expect(Number(out.nrmse)).toBe(1.23e-12);
    expect(Number(out.mean)).toBe(9.87e8);
  });
});

describe('deviationColor', () => {
  it('is green at zero, yellow at half a lamella width, red at one', () => {
    expect(deviationColor(0, 0.01)).toEqual([0, 255, 0]);
    expect(deviationColor(0.005, 0.01)).toEqual([255, 255, 0]);
    expect(deviationColor(0.01, 0.01)).toEqual([255, 0, 0]);
  });

  it('saturates beyond one lamella width and clamps negatives', () => {
    expect(deviationColor(5, 0.01)).toEqual([255, 0, 0]);
    expect(deviationColor(-1, 0.01)).toEqual([0, 255, 0]);
  });

  it('normalizes by the given width', () => {
    expect(deviationColor(0.025, 0.05)).toEqual(deviationColor(0.005, 0.01));
  });

  it('rejects a non-positive width', () => {
    expect(() => deviationColor(0.1, 0)).toThrow('width');
  });
});

describe('collapseBanner', () => {
  it('names the scale and both served deviation values', () => {
    const text = collapseBanner(5, 0.0282, 0.0054);
    expect(text).toContain('f = 5');
    expect(text).toContain('0.0282');
    expect(text).toContain('0.0054');
  });
});
