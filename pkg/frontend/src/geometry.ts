/** Client-side rectilinear boundary validation and snapping.
 *
 * Coordinates live in the unit square with y growing downward; a valid ring
 * starts at its topmost-then-leftmost corner and runs clockwise on screen.
 * Every edit is validated here before any generation call goes out.
 */

import type { Point } from './types';

export const MAX_CORNERS = 40;
export const GRID = 1 / 256;

export interface Validity {
  valid: boolean;
  reason: string | null;
}

export function snapToGrid(v: number): number {
  return Math.min(1, Math.max(0, Math.round(v / GRID) * GRID));
}

/** Force the segment from `prev` to the cursor to be axis-aligned. */
export function orthogonalSnap(prev: Point, cursor: Point): Point {
  const dx = Math.abs(cursor[0] - prev[0]);
  const dy = Math.abs(cursor[1] - prev[1]);
  if (dx >= dy) {
    return [snapToGrid(cursor[0]), prev[1]];
  }
  return [prev[0], snapToGrid(cursor[1])];
}

function segmentsCross(a1: Point, a2: Point, b1: Point, b2: Point): boolean {
  const aVert = a1[0] === a2[0];
  const bVert = b1[0] === b2[0];
  if (aVert && bVert) {
    if (a1[0] !== b1[0]) return false;
    const lo = Math.max(Math.min(a1[1], a2[1]), Math.min(b1[1], b2[1]));
    const hi = Math.min(Math.max(a1[1], a2[1]), Math.max(b1[1], b2[1]));
    return lo < hi;
  }
  if (!aVert && !bVert) {
    if (a1[1] !== b1[1]) return false;
    const lo = Math.max(Math.min(a1[0], a2[0]), Math.min(b1[0], b2[0]));
    const hi = Math.min(Math.max(a1[0], a2[0]), Math.max(b1[0], b2[0]));
    return lo < hi;
  }
  const [v1, v2, h1, h2] = aVert ? [a1, a2, b1, b2] : [b1, b2, a1, a2];
  const vx = v1[0];
  const hy = h1[1];
  const xLo = Math.min(h1[0], h2[0]);
  const xHi = Math.max(h1[0], h2[0]);
  const yLo = Math.min(v1[1], v2[1]);
  const yHi = Math.max(v1[1], v2[1]);
  if (!(xLo <= vx && vx <= xHi && yLo <= hy && hy <= yHi)) return false;
  const touchesEnd = (vx === xLo || vx === xHi) && (hy === yLo || hy === yHi);
  return !touchesEnd;
}

export function shoelace(ring: Point[]): number {
  let s = 0;
  for (let i = 0; i < ring.length; i++) {
    const [x1, y1] = ring[i];
    const [x2, y2] = ring[(i + 1) % ring.length];
    s += x1 * y2 - x2 * y1;
  }
  return s / 2;
}

/** Rotate to topmost-then-leftmost start and make the ring clockwise. */
export function canonicalizeRing(ring: Point[]): Point[] {
  let pts = ring.slice();
  if (shoelace(pts) < 0) {
    pts = pts.slice().reverse();
  }
  let start = 0;
  for (let i = 1; i < pts.length; i++) {
    if (pts[i][1] < pts[start][1] || (pts[i][1] === pts[start][1] && pts[i][0] < pts[start][0])) {
      start = i;
    }
  }
  return pts.slice(start).concat(pts.slice(0, start));
}

/** Validate a closed rectilinear ring; returns the first failure reason. */
export function validateRing(ring: Point[]): Validity {
  if (ring.length < 4) {
    return { valid: false, reason: `needs at least 4 corners (${ring.length})` };
  }
  if (ring.length > MAX_CORNERS) {
    return { valid: false, reason: `more than ${MAX_CORNERS} corners` };
  }
  for (const [x, y] of ring) {
    if (x < 0 || x > 1 || y < 0 || y > 1) {
      return { valid: false, reason: 'corner outside the canvas' };
    }
  }
  const n = ring.length;
  const edges: [Point, Point][] = [];
  for (let i = 0; i < n; i++) {
    const a = ring[i];
    const b = ring[(i + 1) % n];
    const horizontal = a[1] === b[1] && a[0] !== b[0];
    const vertical = a[0] === b[0] && a[1] !== b[1];
    if (!horizontal && !vertical) {
      return { valid: false, reason: `segment ${i + 1} is not axis-aligned` };
    }
    edges.push([a, b]);
  }
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      if (j === i + 1 || (i === 0 && j === n - 1)) continue;
      if (segmentsCross(edges[i][0], edges[i][1], edges[j][0], edges[j][1])) {
        return { valid: false, reason: 'outline crosses itself' };
      }
    }
  }
  if (Math.abs(shoelace(ring)) < 1e-9) {
    return { valid: false, reason: 'outline has no area' };
  }
  return { valid: true, reason: null };
}

export interface EdgeProjection {
  edge: number;
  point: Point;
  direction: Point;
}

/** Nearest point on the ring's edges; used to keep the entrance on a wall. */
export function projectToEdges(ring: Point[], p: Point): EdgeProjection {
  let best: EdgeProjection | null = null;
  let bestDist = Infinity;
  for (let i = 0; i < ring.length; i++) {
    const a = ring[i];
    const b = ring[(i + 1) % ring.length];
    let q: Point;
    if (a[1] === b[1]) {
      const x = Math.min(Math.max(p[0], Math.min(a[0], b[0])), Math.max(a[0], b[0]));
      q = [x, a[1]];
    } else {
      const y = Math.min(Math.max(p[1], Math.min(a[1], b[1])), Math.max(a[1], b[1]));
      q = [a[0], y];
    }
    const d = (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2;
    if (d < bestDist) {
      bestDist = d;
      const len = Math.abs(b[0] - a[0]) + Math.abs(b[1] - a[1]);
      best = {
        edge: i,
        point: q,
        direction: [(b[0] - a[0]) / len, (b[1] - a[1]) / len],
      };
    }
  }
  return best as EdgeProjection;
}

export const ENTRANCE_LENGTH = 16 * GRID;
export const ENTRANCE_DEPTH = 4 * GRID;

/** Entrance rectangle anchored on a boundary edge, depth pointing inward. */
export function entranceRect(ring: Point[], anchor: EdgeProjection): Point[] {
  const [dx, dy] = anchor.direction;
  const a = ring[anchor.edge];
  const b = ring[(anchor.edge + 1) % ring.length];
  const edgeLen = Math.abs(b[0] - a[0]) + Math.abs(b[1] - a[1]);
  let offset = Math.abs(anchor.point[0] - a[0]) + Math.abs(anchor.point[1] - a[1]);
  offset = Math.min(Math.max(offset, 0), Math.max(edgeLen - ENTRANCE_LENGTH, 0));
  const sx = a[0] + dx * offset;
  const sy = a[1] + dy * offset;
  const ex = sx + dx * Math.min(ENTRANCE_LENGTH, edgeLen);
  const ey = sy + dy * Math.min(ENTRANCE_LENGTH, edgeLen);
  // inward normal of a clockwise y-down ring
  const nx = -dy;
  const ny = dx;
  const fx = sx + nx * ENTRANCE_DEPTH;
  const fy = sy + ny * ENTRANCE_DEPTH;
  const gx = ex + nx * ENTRANCE_DEPTH;
  const gy = ey + ny * ENTRANCE_DEPTH;
  const xs = [sx, ex, fx, gx];
  const ys = [sy, ey, fy, gy];
  const x1 = Math.min(...xs);
  const x2 = Math.max(...xs);
  const y1 = Math.min(...ys);
  const y2 = Math.max(...ys);
  return [
    [x1, y1],
    [x2, y1],
    [x2, y2],
    [x1, y2],
  ];
}

/** True when the entrance's long edge still lies on some boundary edge. */
export function entranceOnEdge(ring: Point[], entrance: Point[]): boolean {
  const xs = Array.from(new Set(entrance.map((p) => p[0]))).sort((p, q) => p - q);
  const ys = Array.from(new Set(entrance.map((p) => p[1]))).sort((p, q) => p - q);
  if (xs.length !== 2 || ys.length !== 2) return false;
  const w = xs[1] - xs[0];
  const h = ys[1] - ys[0];
  const longEdges: [Point, Point][] =
    w > h
      ? [
          [[xs[0], ys[0]], [xs[1], ys[0]]],
          [[xs[0], ys[1]], [xs[1], ys[1]]],
        ]
      : [
          [[xs[0], ys[0]], [xs[0], ys[1]]],
          [[xs[1], ys[0]], [xs[1], ys[1]]],
        ];
  const eps = 1e-9;
  const onSegment = (p: Point, a: Point, b: Point) => {
    if (Math.abs(a[0] - b[0]) < eps) {
      return (
        Math.abs(p[0] - a[0]) < eps &&
        p[1] >= Math.min(a[1], b[1]) - eps &&
        p[1] <= Math.max(a[1], b[1]) + eps
      );
    }
    return (
      Math.abs(p[1] - a[1]) < eps &&
      p[0] >= Math.min(a[0], b[0]) - eps &&
      p[0] <= Math.max(a[0], b[0]) + eps
    );
  };
  let hosts = 0;
  for (let i = 0; i < ring.length; i++) {
    const a = ring[i];
    const b = ring[(i + 1) % ring.length];
    for (const [e1, e2] of longEdges) {
      if (onSegment(e1, a, b) && onSegment(e2, a, b)) hosts += 1;
    }
  }
  return hosts === 1;
}
