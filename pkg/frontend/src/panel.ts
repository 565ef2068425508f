/** Condition panel: control level, coarse conditions, seed lock, stage
 * buttons, history strip.  Options are limited to what the service's
 * variant registry actually reports.
 */

import { StudioDocument } from './document';
import type { ControlLevel, Stage, VariantInfo } from './types';

export interface PanelCallbacks {
  runStage: (stage: Stage) => void;
  runFullPlan: () => void;
  undo: () => void;
  exportPlan: () => void;
  exportSvg: () => void;
  resetBoundary: () => void;
}

const LEVELS: { id: ControlLevel; label: string }[] = [
  { id: 'auto', label: 'fully automatic' },
  { id: 'coarse', label: 'coarse: room count & categories' },
  { id: 'fine', label: 'fine: pin elements' },
];

export class ConditionPanel {
  readonly root: HTMLElement;
  private variants: VariantInfo[] = [];
  private status: HTMLElement;
  private historyStrip: HTMLElement;

  constructor(
    container: HTMLElement,
    private doc: StudioDocument,
    private callbacks: PanelCallbacks,
  ) {
    this.root = container;
    this.root.innerHTML = `
      <div class="panel-section">
        <label>control level
          <select data-role="level">
            ${LEVELS.map((l) => `<option value="${l.id}">${l.label}</option>`).join('')}
          </select>
        </label>
        <label>room count <input data-role="room-count" type="number" min="1" max="8"></label>
        <label>categories <input data-role="categories" placeholder="e.g. 1,2,2,3"></label>
        <label><input data-role="seed-lock" type="checkbox"> lock seed
          <input data-role="seed" type="number" value="0"></label>
      </div>
      <div class="panel-section" data-role="variants"></div>
      <div class="panel-section">
        <button data-role="run-nodes">nodes</button>
        <button data-role="run-adjacency">adjacency</button>
        <button data-role="run-partition">partition</button>
        <button data-role="run-plan">full plan</button>
        <button data-role="undo">undo</button>
        <button data-role="reset">reset boundary</button>
        <button data-role="export-plan">export plan</button>
        <button data-role="export-svg">export svg</button>
      </div>
      <div class="panel-section status" data-role="status"></div>
      <div class="panel-section history" data-role="history"></div>
    `;
    this.status = this.query('[data-role=status]');
    this.historyStrip = this.query('[data-role=history]');
    this.bind();
    doc.onChange(() => this.refresh());
    this.refresh();
  }

  private query<T extends HTMLElement = HTMLElement>(selector: string): T {
    const node = this.root.querySelector(selector);
    if (!node) throw new Error(`panel is missing ${selector}`);
    return node as T;
  }

  private bind(): void {
    this.query<HTMLSelectElement>('[data-role=level]').addEventListener('change', (e) => {
      this.doc.setLevel((e.target as HTMLSelectElement).value as ControlLevel);
    });
    const applyCoarse = () => {
      const countRaw = this.query<HTMLInputElement>('[data-role=room-count]').value;
      const catsRaw = this.query<HTMLInputElement>('[data-role=categories]').value;
      const count = countRaw ? Number(countRaw) : null;
      const cats = catsRaw
        ? catsRaw
            .split(',')
            .map((c) => Number(c.trim()))
            .filter((c) => Number.isFinite(c))
        : null;
      this.doc.setCoarse(count, cats && cats.length ? cats : null);
    };
    this.query('[data-role=room-count]').addEventListener('change', applyCoarse);
    this.query('[data-role=categories]').addEventListener('change', applyCoarse);
    const applySeedLock = () => {
      const locked = this.query<HTMLInputElement>('[data-role=seed-lock]').checked;
      const seed = Number(this.query<HTMLInputElement>('[data-role=seed]').value || '0');
      this.doc.setSeedLock(locked, seed);
    };
    this.query('[data-role=seed-lock]').addEventListener('change', applySeedLock);
    this.query('[data-role=seed]').addEventListener('change', applySeedLock);
    this.query('[data-role=run-nodes]').addEventListener('click', () =>
      this.callbacks.runStage('nodes'),
    );
    this.query('[data-role=run-adjacency]').addEventListener('click', () =>
      this.callbacks.runStage('adjacency'),
    );
    this.query('[data-role=run-partition]').addEventListener('click', () =>
      this.callbacks.runStage('partition'),
    );
    this.query('[data-role=run-plan]').addEventListener('click', () => this.callbacks.runFullPlan());
    this.query('[data-role=undo]').addEventListener('click', () => this.callbacks.undo());
    this.query('[data-role=reset]').addEventListener('click', () => this.callbacks.resetBoundary());
    this.query('[data-role=export-plan]').addEventListener('click', () =>
      this.callbacks.exportPlan(),
    );
    this.query('[data-role=export-svg]').addEventListener('click', () => this.callbacks.exportSvg());
  }

  setVariants(variants: VariantInfo[]): void {
    this.variants = variants;
    const host = this.query('[data-role=variants]');
    host.innerHTML =
      '<strong>available networks</strong><ul>' +
      variants.map((v) => `<li data-role="variant">${v.variant}</li>`).join('') +
      '</ul>';
    this.refresh();
  }

  setStatus(text: string, kind: 'ok' | 'error' | 'busy' = 'ok'): void {
    this.status.textContent = text;
    this.status.dataset.kind = kind;
  }

  private refresh(): void {
    const generate = this.doc.canGenerate;
    for (const role of ['run-nodes', 'run-adjacency', 'run-partition', 'run-plan']) {
      this.query<HTMLButtonElement>(`[data-role=${role}]`).disabled = !generate;
    }
    if (!generate) {
      this.setStatus(this.doc.validity.reason ?? 'boundary invalid', 'error');
    } else if (this.status.dataset.kind === 'error') {
      this.setStatus('ready');
    }
    this.historyStrip.innerHTML = this.doc.history
      .map(
        (entry, i) =>
          `<button data-role="history-entry" data-index="${i}">` +
          `${i + 1}. ${entry.stage} · seed ${entry.seed}</button>`,
      )
      .join('');
    this.historyStrip.querySelectorAll('[data-role=history-entry]').forEach((node) => {
      node.addEventListener('click', () => {
        this.doc.restoreHistory(Number((node as HTMLElement).dataset.index));
      });
    });
  }
}
