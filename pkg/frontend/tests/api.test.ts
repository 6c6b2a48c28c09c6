import { describe, expect, it, vi } from 'vitest';

import { ApiError, askQuestion, checkHealth } from '../src/api.js';
import type { FetchLike } from '../src/api.js';
import type { ChatResponse } from '../src/types.js';
import { makeConfig } from '../src/types.js';

const config = makeConfig('http://svc.test');

const answer: ChatResponse = {
  answer_id: 'q_0001',
  answer: 'The practice is described in three steps.',
  matched_question_id: 'q_0001',
  matched_question_text: 'How should the practice be performed?',
  similarity: 0.93,
  q_value: 1.0,
  blended_score: 0.951,
  confidence: 'relevant',
  latency_ms: 1.4,
};

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

describe('askQuestion', () => {
  it('posts the question as JSON to /v1/chat', async () => {
    const fetchFn = vi.fn(async () => jsonResponse(200, answer));
    await askQuestion('what is required?', config, fetchFn);

    expect(fetchFn).toHaveBeenCalledTimes(1);
    const [url, init] = fetchFn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe('http://svc.test/v1/chat');
    expect(init.method).toBe('POST');
    expect(JSON.parse(init.body as string)).toEqual({ question: 'what is required?' });
  });

  it('returns the parsed response on 200', async () => {
    const fetchFn: FetchLike = async () => jsonResponse(200, answer);
    const got = await askQuestion('q', config, fetchFn);
    expect(got).toEqual(answer);
    expect(got.confidence).toBe('relevant');
  });

  it('surfaces the server error body on 4xx', async () => {
    const fetchFn: FetchLike = async () =>
      jsonResponse(422, { error: 'degenerate_input', message: 'text is empty after cleaning' });
    const failure = await askQuestion('?!', config, fetchFn).catch((err) => err);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.message).toBe('text is empty after cleaning');
    expect(failure.status).toBe(422);
    expect(failure.code).toBe('degenerate_input');
  });

  it('falls back to the status when the error body is not JSON', async () => {
    const fetchFn: FetchLike = async () => new Response('gateway exploded', { status: 502 });
    await expect(askQuestion('q', config, fetchFn)).rejects.toThrow(
      'request failed with status 502',
    );
  });

  it('wraps transport failures', async () => {
    const fetchFn: FetchLike = async () => {
      throw new TypeError('fetch failed');
    };
    await expect(askQuestion('q', config, fetchFn)).rejects.toThrow('cannot reach server');
  });

  it('aborts after the configured timeout', async () => {
    const hanging: FetchLike = (_url, init) =>
      new Promise((_resolve, reject) => {
        init?.signal?.addEventListener('abort', () => reject(new Error('aborted')));
      });
    const fast = makeConfig('http://svc.test', 25);
    await expect(askQuestion('q', fast, hanging)).rejects.toThrow('no reply within 25 ms');
  });

  it('rejects a 200 body that is not a chat response', async () => {
    const fetchFn: FetchLike = async () => jsonResponse(200, { nope: true });
    await expect(askQuestion('q', config, fetchFn)).rejects.toThrow('malformed response');
  });
});

describe('checkHealth', () => {
  it('is true only when the bundle is loaded', async () => {
    const up: FetchLike = async () => jsonResponse(200, { status: 'ok', bundle_loaded: true });
    const empty: FetchLike = async () => jsonResponse(200, { status: 'ok', bundle_loaded: false });
    expect(await checkHealth(config, up)).toBe(true);
    expect(await checkHealth(config, empty)).toBe(false);
  });

  it('is false when the server is unreachable or errors', async () => {
    const down: FetchLike = async () => {
      throw new TypeError('fetch failed');
    };
    const broken: FetchLike = async () => new Response('oops', { status: 500 });
    expect(await checkHealth(config, down)).toBe(false);
    expect(await checkHealth(config, broken)).toBe(false);
  });
});

describe('makeConfig', () => {
  it('strips trailing slashes from the base url', () => {
    expect(makeConfig('http://svc.test///').apiBaseUrl).toBe('http://svc.test');
  });

  it('rejects an empty base url', () => {
    expect(() => makeConfig('   ')).toThrow('api_base_url');
  });

  it('defaults the timeout to 10 s', () => {
    expect(makeConfig('http://svc.test').timeoutMs).toBe(10_000);
  });
});
