import type { BBox, JobRequest, JobView, PreviewResponse } from './types';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Serialize a rectangle to the exact query parameters of the sensor
 * preview endpoint. Every rectangle in the UI goes through this one
 * function, so preview queries and job submissions always agree.
 */
export function bboxParams(bbox: BBox): URLSearchParams {
  return new URLSearchParams({
    min_lon: String(bbox.min_lon),
    max_lon: String(bbox.max_lon),
    min_lat: String(bbox.min_lat),
    max_lat: String(bbox.max_lat),
  });
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`API error ${status}: ${JSON.stringify(detail)}`);
  }
}

/** Thin typed client over the orchestrator REST API. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async parse<T>(response: Response): Promise<T> {
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, body && (body as any).detail !== undefined
        ? (body as any).detail
        : body);
    }
    return body as T;
  }

  async previewSensors(bbox: BBox, source = 'fixture', limit?: number): Promise<PreviewResponse> {
    const params = bboxParams(bbox);
    params.set('source', source);
    if (limit !== undefined) params.set('limit', String(limit));
    const response = await this.fetchImpl(`${this.baseUrl}/regions/sensors?${params}`);
    return this.parse<PreviewResponse>(response);
  }

  async createJob(request: JobRequest): Promise<{ id: string }> {
    const response = await this.fetchImpl(`${this.baseUrl}/jobs`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
    });
    return this.parse<{ id: string }>(response);
  }

  async getJob(id: string): Promise<JobView> {
    const response = await this.fetchImpl(`${this.baseUrl}/jobs/${id}`);
    return this.parse<JobView>(response);
  }
}
