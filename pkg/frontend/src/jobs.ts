import type { ApiClient } from './api';
import type { JobJson } from './types';

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  onUpdate?: (job: JobJson) => void;
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

/**
 * Poll a simulation job until it finishes. Resolves with the final job
 * payload on success; rejects when the job fails or the timeout elapses.
 */
export async function pollJob(
  api: ApiClient,
  jobId: string,
  { intervalMs = 500, timeoutMs = 600_000, onUpdate }: PollOptions = {},
): Promise<JobJson> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const job = await api.getJob(jobId);
    onUpdate?.(job);
    if (job.status === 'done') return job;
    if (job.status === 'failed') {
      throw new Error(job.error ?? `job ${jobId} failed`);
    }
    if (Date.now() >= deadline) {
      throw new Error(`job ${jobId} timed out after ${timeoutMs} ms`);
    }
    await sleep(intervalMs);
  }
}

/** Submit a deployment simulation and wait for the result. */
export async function runSimulation(
  api: ApiClient,
  gravity: boolean,
  f?: number,
  options?: PollOptions,
): Promise<JobJson> {
  const { job_id } = await api.postSimulate(gravity, f);
  return pollJob(api, job_id, options);
}
