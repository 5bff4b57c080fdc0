import { describe, expect, it, vi } from 'vitest';
import { ApiClient, type FetchLike } from '../src/api';
import { pollJob, runSimulation } from '../src/jobs';
import type { JobJson } from '../src/types';

function apiWithJobSequence(states: JobJson[]): ApiClient {
  let submitCount = 0;
  let pollCount = 0;
  const fetchFn: FetchLike = async (url, init) => {
    if (url === '/simulate' && init?.method === 'POST') {
      submitCount += 1;
      return {
        ok: true,
        status: 200,
        json: async () => ({ job_id: `job-${submitCount}`, status: 'queued' }),
      };
    }
    const state = states[Math.min(pollCount, states.length - 1)];
    pollCount += 1;
    return { ok: true, status: 200, json: async () => state };
  };
  return new ApiClient('', fetchFn);
}

const done: JobJson = {
  job_id: 'job-1',
  status: 'done',
  result: { state: {}, deviation: { nrmse: 0.0058, mean: 0.002, n: 100, f: 1 } },
};

describe('pollJob', () => {
  it('resolves once the job reports done and relays every update', async () => {
    const seen: string[] = [];
    const api = apiWithJobSequence([
      { job_id: 'job-1', status: 'queued' },
      { job_id: 'job-1', status: 'running' },
      done,
    ]);
    const job = await pollJob(api, 'job-1', {
      intervalMs: 1,
      onUpdate: (j) => seen.push(j.status),
    });
    expect(job.result?.deviation.nrmse).toBe(0.0058);
    expect(seen).toEqual(['queued', 'running', 'done']);
  });

  it('rejects with the server error message when the job fails', async () => {
    const api = apiWithJobSequence([
      { job_id: 'job-1', status: 'failed', error: 'solver did not converge' },
    ]);
    await expect(pollJob(api, 'job-1', { intervalMs: 1 })).rejects.toThrow(
      'solver did not converge',
    );
  });

  it('rejects when the timeout elapses before completion', async () => {
    vi.useFakeTimers();
    try {
      const api = apiWithJobSequence([{ job_id: 'job-1', status: 'running' }]);
      const promise = pollJob(api, 'job-1', { intervalMs: 10, timeoutMs: 25 });
      const guarded = promise.catch((e) => e);
      await vi.advanceTimersByTimeAsync(100);
      const err = await guarded;
      expect(String(err)).toContain('timed out');
    } finally {
      vi.useRealTimers();
    }
  });
});

describe('runSimulation', () => {
  it('submits then polls to completion', async () => {
    const api = apiWithJobSequence([{ job_id: 'job-1', status: 'running' }, done]);
    const job = await runSimulation(api, true, 2.0, { intervalMs: 1 });
    expect(job.status).toBe('done');
  });
});
