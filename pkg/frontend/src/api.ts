import type {
  AlphaDomainJson,
  DeviationJson,
  JobJson,
  LayoutResponse,
  PatchJson,
} from './types';

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

/** Error carrying the service's HTTP status and decoded `detail` payload. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === 'string' ? detail : JSON.stringify(detail));
    this.name = 'ApiError';
  }
}

/**
 * Thin typed client for the design service. The client never computes
 * geometry or statistics; every number it returns came off the wire.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async request<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    const body = (await res.json()) as Record<string, unknown>;
    if (!res.ok) {
      throw new ApiError(res.status, body['detail'] ?? body);
    }
    return body as T;
  }

  getPatch(): Promise<PatchJson> {
    return this.request('/patch');
  }

  getAlphaDomain(): Promise<AlphaDomainJson> {
    return this.request('/alpha-domain');
  }

  postLayout(alpha: number, counts?: [number, number]): Promise<LayoutResponse> {
    return this.request('/layout', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(counts ? { alpha, counts } : { alpha }),
    });
  }

  postSimulate(gravity: boolean, f?: number): Promise<{ job_id: string; status: string }> {
    return this.request('/simulate', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(f === undefined ? { gravity } : { gravity, f }),
    });
  }

  getJob(jobId: string): Promise<JobJson> {
    return this.request(`/jobs/${jobId}`);
  }

  getDeviation(): Promise<DeviationJson> {
    return this.request('/deviation');
  }
}
