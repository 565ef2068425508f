// @vitest-environment jsdom
import { describe, expect, it } from 'vitest';

import { renderBubbles, renderPlan } from '../src/render';
import { svgMarkup } from '../src/export';
import type { NodePins, PlanRecord, ResultRecord } from '../src/types';

function svg(): SVGSVGElement {
  return document.createElementNS('http://www.w3.org/2000/svg', 'svg') as SVGSVGElement;
}

const RESULT: ResultRecord = {
  schema: 'floordiff/v1',
  target: 'adjacency',
  seed: 1,
  variants: {},
  conditioning: {},
  nodes: [
    { category: 1, size: 0.5, location: [0.5, 0.5] },
    { category: 2, size: 0.25, location: [0.25, 0.25] },
    { category: 3, size: 0.25, location: [0.75, 0.25] },
  ],
  adjacency: [
    [0, 1],
    [0, 2],
  ],
};

const PLAN: PlanRecord = {
  schema: 'plan/1',
  boundary: [
    [0, 0],
    [1, 0],
    [1, 1],
    [0, 1],
  ],
  entrance: [
    [0, 0],
    [0.0625, 0],
    [0.0625, 0.015625],
    [0, 0.015625],
  ],
  rooms: [
    { category: 1, size: 0.5, location: [0.25, 0.5], region: [[0, 0, 0.5, 1]] },
    { category: 2, size: 0.5, location: [0.75, 0.5], region: [[0.5, 0, 1, 1]] },
  ],
  adjacency: [[0, 1]],
};

describe('bubble view', () => {
  it('draws one bubble per node and one line per adjacency', () => {
    const host = svg();
    renderBubbles(host, RESULT);
    expect(host.querySelectorAll('[data-role=bubble]').length).toBe(3);
    expect(host.querySelectorAll('[data-role=adjacency]').length).toBe(2);
  });

  it('marks pinned bubbles with the red affordance', () => {
    const host = svg();
    const pins: NodePins = {
      stage: 'nodes',
      rooms: [RESULT.nodes![0], null, null, null, null, null, null, null],
    };
    renderBubbles(host, RESULT, pins);
    const pinned = host.querySelectorAll('[data-pinned="1"]');
    expect(pinned.length).toBe(1);
    expect(pinned[0].getAttribute('stroke')).toBe('#d32f2f');
  });

  it('clears stale content on re-render', () => {
    const host = svg();
    renderBubbles(host, RESULT);
    renderBubbles(host, { ...RESULT, nodes: RESULT.nodes!.slice(0, 1), adjacency: [] });
    expect(host.querySelectorAll('[data-role=bubble]').length).toBe(1);
  });

  it('clicking a bubble toggles its pin through the callback', () => {
    const host = svg();
    document.body.appendChild(host);
    const toggled: number[] = [];
    renderBubbles(host, RESULT, undefined, (row) => toggled.push(row));
    const bubbles = host.querySelectorAll('[data-role=bubble]');
    bubbles[1].dispatchEvent(new MouseEvent('click', { bubbles: true }));
    expect(toggled).toEqual([1]);
  });
});

describe('plan view', () => {
  it('draws rooms, outline, and entrance', () => {
    const host = svg();
    renderPlan(host, PLAN);
    expect(host.querySelectorAll('[data-role=room]').length).toBe(2);
    expect(host.querySelectorAll('[data-role=plan-outline]').length).toBe(1);
    expect(host.querySelectorAll('[data-role=plan-entrance]').length).toBe(1);
  });

  it('exports standalone SVG markup', () => {
    const host = svg();
    renderPlan(host, PLAN);
    const markup = svgMarkup(host);
    expect(markup).toContain('xmlns');
    expect(markup).toContain('data-role="room"');
  });
});
