/** Thin HTTP client. Every number shown in the UI originates here. */

import type {
  DebateResponse,
  EnvironmentResponse,
  LatentResponse,
  ModelPayload,
  PatchResponse,
  ProjectPayload,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly code: string, message: string) {
    super(message);
  }
}

export class ApiClient {
  /** Monotone sequence per request; consumers drop stale responses. */
  private sequence = 0;

  constructor(
    private readonly base: string = '',
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  nextSequence(): number {
    this.sequence += 1;
    return this.sequence;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      const err = body?.error ?? {};
      throw new ApiError(err.code ?? 'internal', err.message ?? 'request failed');
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload ?? {}),
    });
  }

  getProject(pid: string): Promise<ProjectPayload> {
    return this.request(`/projects/${pid}`);
  }

  getModel(pid: string, mid: string): Promise<ModelPayload> {
    return this.request(`/projects/${pid}/models/${mid}`);
  }

  debate(pid: string, mid: string, edgeId: string): Promise<DebateResponse> {
    return this.post(`/projects/${pid}/models/${mid}/edges/${edgeId}/debate`, {});
  }

  environment(
    pid: string,
    mid: string,
    edgeId: string,
    causeLevel: string,
    effectLevel: string,
  ): Promise<EnvironmentResponse> {
    return this.post(`/projects/${pid}/models/${mid}/edges/${edgeId}/environment`, {
      cause_level: causeLevel,
      effect_level: effectLevel,
    });
  }

  latent(pid: string, mid: string, variableId: string): Promise<LatentResponse> {
    return this.post(`/projects/${pid}/models/${mid}/variables/${variableId}/latent`, {});
  }

  patchEdges(pid: string, mid: string, body: unknown): Promise<PatchResponse> {
    return this.request(`/projects/${pid}/models/${mid}/edges`, {
      method: 'PATCH',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  createChildren(
    pid: string,
    mid: string,
    body: { selected?: string[]; note?: string; split?: { a: string; b: string } },
  ): Promise<{ children: string[]; warnings: string[] }> {
    return this.post(`/projects/${pid}/models/${mid}/children`, body);
  }

  sem(pid: string, mid: string): Promise<ModelPayload & { fit: unknown }> {
    return this.post(`/projects/${pid}/models/${mid}/sem`, {});
  }
}
