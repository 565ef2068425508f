/** Synchronized result views: the bubble diagram and the floor plan.
 * Everything drawn here is parsed straight from stored raw responses;
 * pinned elements get a red-border affordance in both views.
 */

import type { PlanRecord, ResultRecord, RoomNodeRecord, StagePins } from './types';
import { CATEGORY_COLORS, CATEGORY_NAMES } from './types';

const SVG_NS = 'http://www.w3.org/2000/svg';

function clear(svg: SVGSVGElement): void {
  while (svg.firstChild) svg.removeChild(svg.firstChild);
}

function el(name: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function pinnedNodeRows(pins: StagePins | undefined): Set<number> {
  const rows = new Set<number>();
  if (pins && pins.stage === 'nodes') {
    pins.rooms.forEach((room, i) => {
      if (room) rows.add(i);
    });
  }
  return rows;
}

/** Match response nodes to pinned rows by exact value. */
function pinnedNodeIndices(
  nodes: RoomNodeRecord[],
  pins: StagePins | undefined,
): Set<number> {
  const out = new Set<number>();
  if (!pins || pins.stage !== 'nodes') return out;
  const wanted = pins.rooms.filter((r): r is RoomNodeRecord => r !== null);
  nodes.forEach((n, i) => {
    for (const w of wanted) {
      if (
        w.category === n.category &&
        w.size === n.size &&
        w.location[0] === n.location[0] &&
        w.location[1] === n.location[1]
      ) {
        out.add(i);
      }
    }
  });
  return out;
}

export function renderBubbles(
  svg: SVGSVGElement,
  result: ResultRecord | null,
  pins?: StagePins,
  onTogglePin?: (row: number) => void,
): void {
  clear(svg);
  if (!result?.nodes) return;
  const nodes = result.nodes;
  const pinned = pinnedNodeIndices(nodes, pins);
  for (const [i, j] of result.adjacency ?? []) {
    const a = nodes[i];
    const b = nodes[j];
    if (!a || !b) continue;
    svg.appendChild(
      el('line', {
        x1: String(a.location[0] * 1000),
        y1: String(a.location[1] * 1000),
        x2: String(b.location[0] * 1000),
        y2: String(b.location[1] * 1000),
        stroke: '#90a4ae',
        'stroke-width': '3',
        'data-role': 'adjacency',
      }),
    );
  }
  nodes.forEach((node, i) => {
    const radius = Math.max(12, Math.sqrt(Math.max(node.size, 0.005)) * 220);
    const circle = el('circle', {
      cx: String(node.location[0] * 1000),
      cy: String(node.location[1] * 1000),
      r: String(radius),
      fill: CATEGORY_COLORS[node.category] ?? '#cccccc',
      stroke: pinned.has(i) ? '#d32f2f' : '#37474f',
      'stroke-width': pinned.has(i) ? '6' : '2',
      'data-role': 'bubble',
      'data-pinned': pinned.has(i) ? '1' : '0',
      'data-category': String(node.category),
    });
    if (onTogglePin) {
      circle.addEventListener('click', () => onTogglePin(i));
    }
    svg.appendChild(circle);
    const label = el('text', {
      x: String(node.location[0] * 1000),
      y: String(node.location[1] * 1000 + 5),
      'text-anchor': 'middle',
      'font-size': '22',
      fill: '#263238',
    });
    label.textContent = CATEGORY_NAMES[node.category] ?? String(node.category);
    svg.appendChild(label);
  });
}

export function renderPlan(
  svg: SVGSVGElement,
  plan: PlanRecord | null,
  pins?: StagePins,
  onTogglePin?: (row: number) => void,
): void {
  clear(svg);
  if (!plan) return;
  svg.appendChild(
    el('polygon', {
      points: plan.boundary.map((p) => `${p[0] * 1000},${p[1] * 1000}`).join(' '),
      fill: 'none',
      stroke: '#263238',
      'stroke-width': '6',
      'data-role': 'plan-outline',
    }),
  );
  const pinnedRows = pinnedNodeRows(pins);
  plan.rooms.forEach((room, i) => {
    for (const [x1, y1, x2, y2] of room.region ?? []) {
      const rect = el('rect', {
        x: String(x1 * 1000),
        y: String(y1 * 1000),
        width: String((x2 - x1) * 1000),
        height: String((y2 - y1) * 1000),
        fill: CATEGORY_COLORS[room.category] ?? '#cccccc',
        'fill-opacity': '0.75',
        stroke: pinnedRows.has(i) ? '#d32f2f' : '#37474f',
        'stroke-width': pinnedRows.has(i) ? '5' : '2',
        'data-role': 'room',
        'data-category': String(room.category),
      });
      if (onTogglePin) {
        rect.addEventListener('click', () => onTogglePin(i));
      }
      svg.appendChild(rect);
    }
  });
  const e = plan.entrance;
  const x1 = Math.min(...e.map((p) => p[0]));
  const y1 = Math.min(...e.map((p) => p[1]));
  const x2 = Math.max(...e.map((p) => p[0]));
  const y2 = Math.max(...e.map((p) => p[1]));
  svg.appendChild(
    el('rect', {
      x: String(x1 * 1000),
      y: String(y1 * 1000),
      width: String((x2 - x1) * 1000),
      height: String((y2 - y1) * 1000),
      fill: '#ef6c00',
      'data-role': 'plan-entrance',
    }),
  );
}
