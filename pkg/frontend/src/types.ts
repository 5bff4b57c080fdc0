/** Payload shapes served by the pipeline's local JSON service. */

export interface PatchJson {
  corners: [number, number[]][];
  side_lengths: number[];
  e: number;
  f: number;
  boundaries: { points: number[][]; length: number }[];
}

export interface AlphaDomainJson {
  intervals: [number, number][];
  alphas: number[];
  diagnostics: Record<string, string>;
}

export interface QuadJson {
  side_lengths: number[];
  alpha_bar: number;
  vertices: number[][];
}

export interface MemberJson {
  id: number;
  family: 'blue' | 'pink';
  u1: number;
  u2: number;
  surface_points: number[][];
  planar_start: number[];
  planar_end: number[];
  length: number;
  boundary: boolean;
}

export interface LayoutJson {
  members: MemberJson[];
  connections: unknown[];
  [key: string]: unknown;
}

export interface LayoutResponse {
  layout: LayoutJson;
  quad: QuadJson;
  validation: Record<string, unknown>;
}

export interface DeviationJson {
  nrmse: number;
  mean: number;
  n: number;
  f: number;
}

export type JobStatus = 'queued' | 'running' | 'done' | 'failed';

export interface JobJson {
  job_id: string;
  status: JobStatus;
  result?: { state: unknown; deviation: DeviationJson };
  error?: string;
}

export interface LayoutRejection {
  message: string;
  alpha: number;
  intervals: [number, number][];
}
