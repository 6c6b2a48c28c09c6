// Thin fetch client for the consultation service.
//
// Every failure mode surfaces as ApiError with a human-readable message:
// transport errors, the configured timeout, and non-2xx responses (whose
// JSON error body supplies the message when present).

import type { ChatResponse, HealthResponse, UiConfig } from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
    readonly code: string | null = null,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function jsonBodyOf(res: Response): Promise<Record<string, unknown> | null> {
  try {
    const body = await res.json();
    return typeof body === 'object' && body !== null ? (body as Record<string, unknown>) : null;
  } catch {
    return null;
  }
}

export async function askQuestion(
  question: string,
  config: UiConfig,
  fetchFn: FetchLike = fetch,
): Promise<ChatResponse> {
  const controller = new AbortController();
  const timer = setTimeout(() => controller.abort(), config.timeoutMs);
  try {
    let res: Response;
    try {
      res = await fetchFn(`${config.apiBaseUrl}/v1/chat`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ question }),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) {
        throw new ApiError(`no reply within ${config.timeoutMs} ms`);
      }
      throw new ApiError(`cannot reach server: ${err instanceof Error ? err.message : err}`);
    }
    const body = await jsonBodyOf(res);
    if (!res.ok) {
      const message =
        typeof body?.message === 'string' ? body.message : `request failed with status ${res.status}`;
      const code = typeof body?.error === 'string' ? body.error : null;
      throw new ApiError(message, res.status, code);
    }
    if (typeof body?.answer !== 'string' || typeof body?.confidence !== 'string') {
      throw new ApiError('malformed response from server', res.status);
    }
    return body as unknown as ChatResponse;
  } finally {
    clearTimeout(timer);
  }
}

export async function checkHealth(config: UiConfig, fetchFn: FetchLike = fetch): Promise<boolean> {
  try {
    const res = await fetchFn(`${config.apiBaseUrl}/v1/health`, { method: 'GET' });
    if (!res.ok) return false;
    const body = (await res.json()) as HealthResponse;
    return body.status === 'ok' && body.bundle_loaded === true;
  } catch {
    return false;
  }
}
