/** Studio document: the single mutable state behind both views.
 *
 * Generation results are never edited client-side; the document stores the
 * raw response text and every rendered geometry is re-parsed from it, so a
 * hash of the stored text always identifies what is on screen.  The history
 * strip keeps the last 20 raw responses and undo restores them verbatim.
 */

import { canonicalizeRing, entranceOnEdge, validateRing, type Validity } from './geometry';
import type {
  ControlLevel,
  Point,
  ResultRecord,
  Stage,
  StagePins,
} from './types';

export const HISTORY_LIMIT = 20;

export interface HistoryEntry {
  stage: Stage;
  raw: string;
  seed: number;
}

type Listener = () => void;

export class StudioDocument {
  // boundary under construction
  points: Point[] = [];
  closed = false;
  entrance: Point[] | null = null;
  validity: Validity = { valid: false, reason: 'no boundary yet' };

  // conditions
  level: ControlLevel = 'auto';
  roomCount: number | null = null;
  categories: number[] | null = null;
  seedLocked = false;
  lockedSeed = 0;

  // per-stage pins and latest raw results
  pins: Partial<Record<Stage, StagePins>> = {};
  results: Partial<Record<Stage, string>> = {};

  history: HistoryEntry[] = [];

  private listeners: Listener[] = [];

  onChange(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  // -- boundary editing -----------------------------------------------------

  addCorner(p: Point): void {
    if (this.closed) return;
    this.points.push(p);
    this.revalidate();
    this.emit();
  }

  closeRing(): void {
    if (this.closed || this.points.length < 3) {
      this.revalidate();
      this.emit();
      return;
    }
    // drop a trailing duplicate of the start, then close
    const first = this.points[0];
    const last = this.points[this.points.length - 1];
    if (first[0] === last[0] && first[1] === last[1]) {
      this.points.pop();
    }
    // the closing edge must be axis-aligned too; insert an L-corner if not,
    // preferring the candidate that does not collide with existing corners
    const tail = this.points[this.points.length - 1];
    if (tail[0] !== first[0] && tail[1] !== first[1]) {
      const c1: Point = [tail[0], first[1]];
      const c2: Point = [first[0], tail[1]];
      const collides = (c: Point) => this.points.some((p) => p[0] === c[0] && p[1] === c[1]);
      this.points.push(collides(c1) ? c2 : c1);
    }
    this.points = canonicalizeRing(this.points);
    this.closed = true;
    this.revalidate();
    this.emit();
  }

  resetBoundary(): void {
    this.points = [];
    this.closed = false;
    this.entrance = null;
    this.results = {};
    this.revalidate();
    this.emit();
  }

  setEntrance(rect: Point[]): void {
    this.entrance = rect;
    this.revalidate();
    this.emit();
  }

  revalidate(): void {
    if (!this.closed) {
      this.validity = { valid: false, reason: 'outline not closed' };
      return;
    }
    const ringCheck = validateRing(this.points);
    if (!ringCheck.valid) {
      this.validity = ringCheck;
      return;
    }
    if (!this.entrance) {
      this.validity = { valid: false, reason: 'place the entrance' };
      return;
    }
    if (!entranceOnEdge(this.points, this.entrance)) {
      this.validity = { valid: false, reason: 'entrance must sit on one wall' };
      return;
    }
    this.validity = { valid: true, reason: null };
  }

  get canGenerate(): boolean {
    return this.validity.valid;
  }

  boundaryPayload(): { corners: Point[]; entrance: Point[] } {
    if (!this.validity.valid || !this.entrance) {
      throw new Error(this.validity.reason ?? 'boundary invalid');
    }
    return { corners: this.points.slice(), entrance: this.entrance.slice() };
  }

  // -- conditions and pins ---------------------------------------------------

  setLevel(level: ControlLevel): void {
    this.level = level;
    this.emit();
  }

  setCoarse(roomCount: number | null, categories: number[] | null): void {
    this.roomCount = roomCount;
    this.categories = categories;
    this.emit();
  }

  setSeedLock(locked: boolean, seed = 0): void {
    this.seedLocked = locked;
    this.lockedSeed = seed;
    this.emit();
  }

  setPins(stage: Stage, pins: StagePins | null): void {
    if (pins === null) {
      delete this.pins[stage];
    } else {
      this.pins[stage] = pins;
    }
    this.emit();
  }

  /** Toggle a node pin using the latest nodes result row. */
  toggleNodePin(row: number): void {
    const latest = this.parsedResult('nodes');
    if (!latest?.nodes) return;
    const current =
      this.pins.nodes && this.pins.nodes.stage === 'nodes'
        ? this.pins.nodes.rooms.slice()
        : new Array(8).fill(null);
    current[row] = current[row] ? null : latest.nodes[row] ?? null;
    const any = current.some((r) => r !== null);
    this.setPins('nodes', any ? { stage: 'nodes', rooms: current } : null);
  }

  // -- results: raw in, parsed views out --------------------------------------

  recordResult(stage: Stage, rawResponse: string): void {
    this.results[stage] = rawResponse;
    const order: Stage[] = ['nodes', 'adjacency', 'partition'];
    for (const later of order.slice(order.indexOf(stage) + 1)) {
      delete this.results[later];
    }
    const parsed = JSON.parse(rawResponse) as ResultRecord;
    this.history.push({ stage, raw: rawResponse, seed: parsed.seed });
    if (this.history.length > HISTORY_LIMIT) {
      this.history = this.history.slice(this.history.length - HISTORY_LIMIT);
    }
    this.emit();
  }

  parsedResult(stage: Stage): ResultRecord | null {
    const raw = this.results[stage];
    return raw ? (JSON.parse(raw) as ResultRecord) : null;
  }

  /** Undo: restore the exact previous response document for its stage. */
  undo(): boolean {
    if (this.history.length < 2) return false;
    this.history.pop();
    const previous = this.history[this.history.length - 1];
    this.results[previous.stage] = previous.raw;
    this.emit();
    return true;
  }

  restoreHistory(index: number): void {
    const entry = this.history[index];
    if (!entry) return;
    this.results[entry.stage] = entry.raw;
    this.emit();
  }
}
