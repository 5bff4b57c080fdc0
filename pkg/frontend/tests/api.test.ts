import { describe, expect, it } from 'vitest';
import { ApiClient, ApiError, type FetchLike } from '../src/api';

function fakeFetch(
  handler: (url: string, init?: Parameters<FetchLike>[1]) => { status: number; body: unknown },
): { fetchFn: FetchLike; calls: { url: string; init?: Parameters<FetchLike>[1] }[] } {
  const calls: { url: string; init?: Parameters<FetchLike>[1] }[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    calls.push({ url, init });
    const { status, body } = handler(url, init);
    return { ok: status < 400, status, json: async () => body };
  };
  return { fetchFn, calls };
}

describe('ApiClient', () => {
  it('fetches the alpha domain from the right endpoint', async () => {
    const domain = { intervals: [[0.1, 1.2]], alphas: [], diagnostics: {} };
    const { fetchFn, calls } = fakeFetch(() => ({ status: 200, body: domain }));
    const api = new ApiClient('http://host:8321', fetchFn);
    expect(await api.getAlphaDomain()).toEqual(domain);
    expect(calls[0].url).toBe('http://host:8321/alpha-domain');
  });

  it('posts layout requests as JSON with the chosen alpha', async () => {
    const { fetchFn, calls } = fakeFetch(() => ({
      status: 200,
      body: { layout: { members: [] }, quad: {}, validation: {} },
    }));
    const api = new ApiClient('', fetchFn);
    await api.postLayout(0.7, [4, 4]);
    expect(calls[0].url).toBe('/layout');
    expect(calls[0].init?.method).toBe('POST');
    expect(JSON.parse(calls[0].init?.body ?? '')).toEqual({ alpha: 0.7, counts: [4, 4] });
  });

  it('surfaces 422 rejections with the served detail payload', async () => {
    const detail = {
      message: 'alpha outside the feasible domain',
      alpha: 9,
      intervals: [[0.1, 1.2]],
    };
    const { fetchFn } = fakeFetch(() => ({ status: 422, body: { detail } }));
    const api = new ApiClient('', fetchFn);
    const err = await api.postLayout(9).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.detail).toEqual(detail);
  });

  it('returns deviation numbers exactly as served', async () => {
    const dev = { nrmse: 0.005828123456789, mean: 0.0021, n: 1234, f: 1.0 };
    const { fetchFn } = fakeFetch(() => ({ status: 200, body: dev }));
    const api = new ApiClient('', fetchFn);
    expect(await api.getDeviation()).toEqual(dev);
  });
});
