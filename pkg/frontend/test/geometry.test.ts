import { describe, expect, it } from 'vitest';

import {
  canonicalizeRing,
  entranceOnEdge,
  entranceRect,
  orthogonalSnap,
  projectToEdges,
  shoelace,
  validateRing,
} from '../src/geometry';
import type { Point } from '../src/types';

const SQUARE: Point[] = [
  [0.25, 0.25],
  [0.75, 0.25],
  [0.75, 0.75],
  [0.25, 0.75],
];

describe('orthogonalSnap', () => {
  it('keeps segments axis aligned', () => {
    expect(orthogonalSnap([0.5, 0.5], [0.8, 0.52])).toEqual([0.80078125, 0.5]);
    expect(orthogonalSnap([0.5, 0.5], [0.52, 0.8])).toEqual([0.5, 0.80078125]);
  });
});

describe('validateRing', () => {
  it('accepts a rectangle', () => {
    expect(validateRing(SQUARE).valid).toBe(true);
  });

  it('rejects too few corners', () => {
    const v = validateRing(SQUARE.slice(0, 3));
    expect(v.valid).toBe(false);
    expect(v.reason).toContain('4 corners');
  });

  it('rejects diagonal segments', () => {
    const v = validateRing([
      [0.2, 0.2],
      [0.8, 0.25],
      [0.8, 0.8],
      [0.2, 0.8],
    ]);
    expect(v.valid).toBe(false);
    expect(v.reason).toContain('axis-aligned');
  });

  it('rejects self-crossing outlines', () => {
    const v = validateRing([
      [0.0, 0.0],
      [1.0, 0.0],
      [1.0, 0.5],
      [0.5, 0.5],
      [0.5, 0.25],
      [0.75, 0.25],
      [0.75, 0.75],
      [0.0, 0.75],
    ]);
    expect(v.valid).toBe(false);
    expect(v.reason).toContain('crosses');
  });

  it('rejects more than 40 corners', () => {
    const ring: Point[] = [];
    for (let i = 0; i <= 10; i++) {
      ring.push([0.1 + i * 0.05, i % 2 ? 0.15 : 0.1]);
      ring.push([0.1 + (i + 1) * 0.05, i % 2 ? 0.15 : 0.1]);
    }
    while (ring.length <= 40) ring.push([0.9, 0.5 + ring.length * 0.001]);
    expect(validateRing(ring.slice(0, 41)).valid).toBe(false);
  });
});

describe('canonicalizeRing', () => {
  it('starts topmost-then-leftmost and runs clockwise', () => {
    const shuffled: Point[] = [SQUARE[2], SQUARE[3], SQUARE[0], SQUARE[1]];
    expect(canonicalizeRing(shuffled)).toEqual(SQUARE);
    const ccw = SQUARE.slice().reverse();
    const fixed = canonicalizeRing(ccw);
    expect(fixed[0]).toEqual([0.25, 0.25]);
    expect(shoelace(fixed)).toBeGreaterThan(0);
  });
});

describe('entrance placement', () => {
  it('projects arbitrary points back to the nearest edge', () => {
    const projection = projectToEdges(SQUARE, [0.5, 0.1]);
    expect(projection.point[1]).toBeCloseTo(0.25, 10);
    expect(projection.edge).toBe(0);
  });

  it('builds a rectangle whose long edge lies on the wall', () => {
    const anchor = projectToEdges(SQUARE, [0.4, 0.25]);
    const rect = entranceRect(SQUARE, anchor);
    expect(rect).toHaveLength(4);
    expect(entranceOnEdge(SQUARE, rect)).toBe(true);
  });

  it('flags floating entrances', () => {
    const floating: Point[] = [
      [0.4, 0.4],
      [0.4625, 0.4],
      [0.4625, 0.415625],
      [0.4, 0.415625],
    ];
    expect(entranceOnEdge(SQUARE, floating)).toBe(false);
  });

  it('stays inside the edge span near corners', () => {
    const anchor = projectToEdges(SQUARE, [0.74, 0.24]);
    const rect = entranceRect(SQUARE, anchor);
    expect(entranceOnEdge(SQUARE, rect)).toBe(true);
    for (const [x] of rect) {
      expect(x).toBeLessThanOrEqual(0.75 + 1e-9);
    }
  });
});
