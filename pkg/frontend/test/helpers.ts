/** Test scaffolding: recorded API fixtures served through a fake fetch. */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { ApiClient, type FetchLike } from '../src/api.js';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), '..', 'fixtures');

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), 'utf-8')) as T;
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export interface Route {
  /** substring or regexp matched against `${METHOD} ${url}` */
  match: string | RegExp;
  payload: unknown;
  status?: number;
  /** optional per-call delay so tests can force response reordering */
  delayMs?: number;
}

export function fakeFetch(routes: Route[]): { fetch: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? 'GET';
    const key = `${method} ${url}`;
    calls.push({
      url,
      method,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    for (const route of routes) {
      const hit =
        typeof route.match === 'string'
          ? key.includes(route.match)
          : route.match.test(key);
      if (hit) {
        if (route.delayMs) {
          await new Promise((resolve) => setTimeout(resolve, route.delayMs));
        }
        return jsonResponse(route.payload, route.status ?? 200);
      }
    }
    return jsonResponse(
      { error: { code: 'not_found', message: `no route for ${key}` } },
      404,
    );
  };
  return { fetch, calls };
}

function jsonResponse(payload: unknown, status: number): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => payload,
  } as Response;
}

export function clientFor(routes: Route[]): {
  api: ApiClient;
  calls: RecordedCall[];
} {
  const { fetch, calls } = fakeFetch(routes);
  return { api: new ApiClient('', fetch), calls };
}
