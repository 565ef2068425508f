/** Wire types shared with the generation service (schema floordiff/v1). */

export type Point = [number, number];
export type RectTuple = [number, number, number, number];

export const API_SCHEMA = 'floordiff/v1';

export const CATEGORY_NAMES: Record<number, string> = {
  1: 'living',
  2: 'bedroom',
  3: 'kitchen',
  4: 'bathroom',
  5: 'balcony',
  6: 'storage',
};

export const CATEGORY_COLORS: Record<number, string> = {
  1: '#f2c14e',
  2: '#6aa9e9',
  3: '#e06b54',
  4: '#7fd0c2',
  5: '#9ccb62',
  6: '#b58fc4',
};

export interface RoomNodeRecord {
  category: number;
  size: number;
  location: Point;
}

export interface RoomRecord extends RoomNodeRecord {
  region: RectTuple[] | null;
}

export interface PlanRecord {
  schema: string;
  boundary: Point[];
  entrance: Point[];
  rooms: RoomRecord[];
  adjacency: [number, number][];
}

export interface ResultRecord {
  schema: string;
  target: string;
  seed: number;
  variants: Record<string, string>;
  conditioning: Record<string, unknown>;
  session?: string;
  nodes?: RoomNodeRecord[];
  adjacency?: [number, number][];
  room_count?: number;
  boxes?: { category: number; box: RectTuple }[];
  plan?: PlanRecord | null;
}

export interface VariantInfo {
  variant: string;
  stage: string;
  conditions: string;
}

export interface SessionView {
  schema: string;
  session: string;
  boundary: { corners: Point[]; entrance: Point[] } | null;
  room_count: number | null;
  categories: number[] | null;
  pins: Record<string, unknown>;
  stages_done: string[];
}

/** Partial-input pin payloads, one shape per stage. */
export interface NodePins {
  stage: 'nodes';
  rooms: (RoomNodeRecord | null)[];
}

export interface AdjacencyPins {
  stage: 'adjacency';
  entries: [number, number, 0 | 1][];
}

export interface PartitionPins {
  stage: 'partition';
  boxes: { row: number; box: RectTuple }[];
}

export type StagePins = NodePins | AdjacencyPins | PartitionPins;

export type Stage = 'nodes' | 'adjacency' | 'partition';

export type ControlLevel = 'auto' | 'coarse' | 'fine';
