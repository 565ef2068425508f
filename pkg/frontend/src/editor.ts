/** Boundary editor: click-to-place rectilinear corners on an SVG canvas,
 * orthogonal snapping, click-near-start to close, and an entrance handle
 * that drags along the walls and snaps back onto the nearest edge.
 */

import { StudioDocument } from './document';
import {
  entranceRect,
  orthogonalSnap,
  projectToEdges,
  snapToGrid,
} from './geometry';
import type { Point } from './types';

const SVG_NS = 'http://www.w3.org/2000/svg';
const CLOSE_RADIUS = 0.03;

export class BoundaryEditor {
  private draggingEntrance = false;

  constructor(
    public svg: SVGSVGElement,
    public doc: StudioDocument,
  ) {
    svg.addEventListener('pointerdown', this.onPointerDown);
    svg.addEventListener('pointermove', this.onPointerMove);
    svg.addEventListener('pointerup', this.onPointerUp);
    doc.onChange(() => this.render());
    this.render();
  }

  /** Map client coordinates to the unit square (attribute fallback keeps
   * this testable where layout boxes are not computed). */
  toWorld(clientX: number, clientY: number): Point {
    const rect = this.svg.getBoundingClientRect();
    let { width, height, left, top } = rect;
    if (!width || !height) {
      width = Number(this.svg.getAttribute('width') ?? 512);
      height = Number(this.svg.getAttribute('height') ?? 512);
      left = 0;
      top = 0;
    }
    return [(clientX - left) / width, (clientY - top) / height];
  }

  private onPointerDown = (event: PointerEvent | MouseEvent): void => {
    const world = this.toWorld(event.clientX, event.clientY);
    if (this.doc.closed) {
      if (this.doc.entrance && this.nearEntrance(world)) {
        this.draggingEntrance = true;
      }
      return;
    }
    this.placeCorner(world);
  };

  private onPointerMove = (event: PointerEvent | MouseEvent): void => {
    if (!this.draggingEntrance) return;
    const world = this.toWorld(event.clientX, event.clientY);
    this.moveEntrance(world);
  };

  private onPointerUp = (): void => {
    if (this.draggingEntrance) {
      this.draggingEntrance = false;
      // snap back onto the nearest edge even after an off-edge drag
      if (this.doc.entrance) {
        const center = this.entranceCenter();
        this.moveEntrance(center);
      }
    }
  };

  placeCorner(world: Point): void {
    const doc = this.doc;
    if (doc.points.length >= 3) {
      const first = doc.points[0];
      const d = Math.hypot(world[0] - first[0], world[1] - first[1]);
      if (d <= CLOSE_RADIUS) {
        doc.closeRing();
        if (doc.closed && !doc.entrance) {
          this.placeDefaultEntrance();
        }
        return;
      }
    }
    let p: Point;
    if (doc.points.length === 0) {
      p = [snapToGrid(world[0]), snapToGrid(world[1])];
    } else {
      p = orthogonalSnap(doc.points[doc.points.length - 1], world);
    }
    doc.addCorner(p);
  }

  placeDefaultEntrance(): void {
    const anchor = projectToEdges(this.doc.points, this.doc.points[0]);
    this.doc.setEntrance(entranceRect(this.doc.points, anchor));
  }

  moveEntrance(world: Point): void {
    const anchor = projectToEdges(this.doc.points, world);
    this.doc.setEntrance(entranceRect(this.doc.points, anchor));
  }

  private entranceCenter(): Point {
    const e = this.doc.entrance as Point[];
    const cx = e.reduce((s, p) => s + p[0], 0) / e.length;
    const cy = e.reduce((s, p) => s + p[1], 0) / e.length;
    return [cx, cy];
  }

  private nearEntrance(world: Point): boolean {
    const e = this.doc.entrance as Point[];
    const x1 = Math.min(...e.map((p) => p[0])) - 0.02;
    const x2 = Math.max(...e.map((p) => p[0])) + 0.02;
    const y1 = Math.min(...e.map((p) => p[1])) - 0.02;
    const y2 = Math.max(...e.map((p) => p[1])) + 0.02;
    return world[0] >= x1 && world[0] <= x2 && world[1] >= y1 && world[1] <= y2;
  }

  render(): void {
    const doc = this.doc;
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
    const scale = (p: Point): string => `${p[0] * 1000},${p[1] * 1000}`;

    if (doc.points.length > 0) {
      const poly = document.createElementNS(SVG_NS, doc.closed ? 'polygon' : 'polyline');
      poly.setAttribute('points', doc.points.map(scale).join(' '));
      poly.setAttribute('fill', doc.closed ? 'rgba(120,144,156,0.12)' : 'none');
      poly.setAttribute('stroke', doc.validity.valid ? '#2e7d32' : '#78909c');
      poly.setAttribute('stroke-width', '4');
      poly.setAttribute('data-role', 'outline');
      this.svg.appendChild(poly);
      for (const p of doc.points) {
        const dot = document.createElementNS(SVG_NS, 'circle');
        dot.setAttribute('cx', String(p[0] * 1000));
        dot.setAttribute('cy', String(p[1] * 1000));
        dot.setAttribute('r', '6');
        dot.setAttribute('fill', '#455a64');
        dot.setAttribute('data-role', 'corner');
        this.svg.appendChild(dot);
      }
    }
    if (doc.entrance) {
      const e = doc.entrance;
      const rect = document.createElementNS(SVG_NS, 'rect');
      const x1 = Math.min(...e.map((p) => p[0]));
      const y1 = Math.min(...e.map((p) => p[1]));
      const x2 = Math.max(...e.map((p) => p[0]));
      const y2 = Math.max(...e.map((p) => p[1]));
      rect.setAttribute('x', String(x1 * 1000));
      rect.setAttribute('y', String(y1 * 1000));
      rect.setAttribute('width', String((x2 - x1) * 1000));
      rect.setAttribute('height', String((y2 - y1) * 1000));
      rect.setAttribute('fill', '#ef6c00');
      rect.setAttribute('data-role', 'entrance');
      this.svg.appendChild(rect);
    }
  }
}
