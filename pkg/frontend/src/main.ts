/** Studio wiring: document + editor + panel + the two result views. */

import { ApiClient, ApiError } from './api';
import { StudioDocument } from './document';
import { BoundaryEditor } from './editor';
import { download, planToInterchangeLine, svgMarkup } from './export';
import { ConditionPanel } from './panel';
import { renderBubbles, renderPlan } from './render';
import type { ResultRecord, Stage } from './types';

export class StudioApp {
  doc = new StudioDocument();
  editor: BoundaryEditor;
  panel: ConditionPanel;
  private sessionId: string | null = null;
  private inFlight = false;

  constructor(
    private api: ApiClient,
    private editorSvg: SVGSVGElement,
    private bubbleSvg: SVGSVGElement,
    private planSvg: SVGSVGElement,
    panelHost: HTMLElement,
  ) {
    this.editor = new BoundaryEditor(editorSvg, this.doc);
    this.panel = new ConditionPanel(panelHost, this.doc, {
      runStage: (stage) => void this.runStage(stage),
      runFullPlan: () => void this.runFullPlan(),
      undo: () => this.undo(),
      exportPlan: () => this.exportPlan(),
      exportSvg: () => download('floorplan.svg', 'image/svg+xml', svgMarkup(this.planSvg)),
      resetBoundary: () => {
        this.sessionId = null;
        this.doc.resetBoundary();
      },
    });
    this.doc.onChange(() => this.renderViews());
  }

  async start(): Promise<void> {
    try {
      const variants = await this.api.variants();
      this.panel.setVariants(variants);
      this.panel.setStatus('ready');
    } catch (error) {
      this.panel.setStatus(`service unreachable: ${(error as Error).message}`, 'error');
    }
  }

  private async ensureSession(): Promise<string> {
    if (this.sessionId) return this.sessionId;
    const view = await this.api.createSession();
    this.sessionId = view.session;
    await this.api.patchSession(this.sessionId, { boundary: this.doc.boundaryPayload() });
    return this.sessionId;
  }

  private async syncConditions(sessionId: string): Promise<void> {
    const coarse = this.doc.level === 'coarse';
    await this.api.patchSession(sessionId, {
      room_count: coarse ? this.doc.roomCount : null,
      categories: coarse ? this.doc.categories : null,
      pins: {
        nodes: this.doc.level === 'fine' ? (this.doc.pins.nodes ?? null) : null,
        adjacency: this.doc.level === 'fine' ? (this.doc.pins.adjacency ?? null) : null,
        partition: this.doc.level === 'fine' ? (this.doc.pins.partition ?? null) : null,
      },
    });
  }

  /** One in-flight generation at a time; later clicks are ignored. */
  async runStage(stage: Stage): Promise<ResultRecord | null> {
    if (this.inFlight || !this.doc.canGenerate) return null;
    this.inFlight = true;
    this.panel.setStatus(`generating ${stage}…`, 'busy');
    try {
      const sessionId = await this.ensureSession();
      await this.syncConditions(sessionId);
      const seed = this.doc.seedLocked ? this.doc.lockedSeed : undefined;
      const result = await this.api.step(sessionId, stage, seed);
      this.doc.recordResult(stage, JSON.stringify(result));
      this.panel.setStatus(`${stage} done (seed ${result.seed})`);
      return result;
    } catch (error) {
      const message =
        error instanceof ApiError ? `${error.status}: ${error.message}` : String(error);
      this.panel.setStatus(`generation failed — ${message} (retry)`, 'error');
      return null;
    } finally {
      this.inFlight = false;
    }
  }

  async runFullPlan(): Promise<void> {
    for (const stage of ['nodes', 'adjacency', 'partition'] as Stage[]) {
      const result = await this.runStage(stage);
      if (!result) return;
    }
  }

  undo(): void {
    if (!this.doc.undo()) {
      this.panel.setStatus('nothing to undo', 'error');
    }
  }

  exportPlan(): void {
    const partition = this.doc.parsedResult('partition');
    if (partition?.plan) {
      download('floorplan.jsonl', 'application/jsonl', planToInterchangeLine(partition.plan));
    } else {
      this.panel.setStatus('no finished plan to export', 'error');
    }
  }

  renderViews(): void {
    const nodesResult = this.doc.parsedResult('nodes');
    const adjacencyResult = this.doc.parsedResult('adjacency');
    const bubbleSource = adjacencyResult ?? nodesResult;
    // pins set in either view apply to the same underlying node rows
    const togglePin = (row: number) => this.doc.toggleNodePin(row);
    renderBubbles(this.bubbleSvg, bubbleSource, this.doc.pins.nodes, togglePin);
    const partitionResult = this.doc.parsedResult('partition');
    renderPlan(this.planSvg, partitionResult?.plan ?? null, this.doc.pins.nodes, togglePin);
  }
}

export function mount(root: Document, baseUrl: string): StudioApp {
  const api = new ApiClient(baseUrl);
  const app = new StudioApp(
    api,
    root.querySelector('#editor') as SVGSVGElement,
    root.querySelector('#bubbles') as SVGSVGElement,
    root.querySelector('#plan') as SVGSVGElement,
    root.querySelector('#panel') as HTMLElement,
  );
  void app.start();
  return app;
}

declare global {
  interface Window {
    studio?: StudioApp;
  }
}

if (typeof window !== 'undefined' && typeof document !== 'undefined' && document.querySelector('#editor')) {
  const base = new URLSearchParams(window.location.search).get('api') ?? 'http://127.0.0.1:8760';
  window.studio = mount(document, base);
}
