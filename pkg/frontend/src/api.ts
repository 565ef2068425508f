/** Thin fetch client for the generation service. */

import {
  API_SCHEMA,
  type Point,
  type ResultRecord,
  type SessionView,
  type Stage,
  type StagePins,
  type VariantInfo,
} from './types';

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function parse<T>(response: Response): Promise<T> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    /* non-JSON error body */
  }
  if (!response.ok) {
    const message =
      body && typeof body === 'object' && 'error' in (body as Record<string, unknown>)
        ? String((body as Record<string, unknown>).error)
        : `HTTP ${response.status}`;
    throw new ApiError(response.status, message);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    public baseUrl: string,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async post<T>(path: string, body: Record<string, unknown>): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ schema: API_SCHEMA, ...body }),
    });
    return parse<T>(response);
  }

  async health(): Promise<{ status: string }> {
    const response = await this.fetchImpl(this.baseUrl + '/v1/health');
    return parse(response);
  }

  async variants(): Promise<VariantInfo[]> {
    const response = await this.fetchImpl(this.baseUrl + '/v1/variants');
    const body = await parse<{ variants: VariantInfo[] }>(response);
    return body.variants;
  }

  async createSession(): Promise<SessionView> {
    return this.post<SessionView>('/v1/session', {});
  }

  async patchSession(
    sessionId: string,
    patch: {
      boundary?: { corners: Point[]; entrance: Point[] } | null;
      room_count?: number | null;
      categories?: number[] | null;
      pins?: Partial<Record<Stage, StagePins | null>>;
    },
  ): Promise<SessionView> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1/session/${sessionId}`, {
      method: 'PATCH',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ schema: API_SCHEMA, ...patch }),
    });
    return parse<SessionView>(response);
  }

  async step(sessionId: string, stage: Stage, seed?: number): Promise<ResultRecord> {
    const body: Record<string, unknown> = { stage };
    if (seed !== undefined) body.seed = seed;
    return this.post<ResultRecord>(`/v1/session/${sessionId}/step`, body);
  }

  async generatePlan(body: Record<string, unknown>): Promise<ResultRecord> {
    return this.post<ResultRecord>('/v1/generate/plan', body);
  }
}
