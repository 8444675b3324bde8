/** Shared test plumbing: a fetch mock that serves the recorded API fixtures. */

import { vi } from 'vitest';

import requestTypes from './fixtures/request-types.json';
import treeCv from './fixtures/tree-cv.json';
import histogram from './fixtures/histogram.json';
import nodeModePath from './fixtures/node-mode-path.json';
import highlightCount1 from './fixtures/highlight-count1.json';
import highlightCount0 from './fixtures/highlight-count0.json';
import recolorSlow from './fixtures/recolor-slow.json';

export const MODE_PATH = 'getbycheapest/getleftticket/getcheapestroute';

export const fixtures = {
  requestTypes,
  treeCv,
  histogram,
  nodeModePath,
  highlightCount1,
  highlightCount0,
  recolorSlow,
};

export interface FetchLog {
  urls: string[];
}

/**
 * Route API URLs to fixture payloads, recording every call. Unmatched
 * URLs resolve to a 404 with the service's error shape.
 */
export function installFetchMock(): FetchLog {
  const log: FetchLog = { urls: [] };

  const route = (url: string): { status: number; body: unknown } => {
    if (url.includes('/request-types')) {
      return { status: 200, body: requestTypes };
    }
    if (url.includes('/recolor?')) {
      return { status: 200, body: recolorSlow };
    }
    if (url.includes('/tree?')) {
      return { status: 200, body: treeCv };
    }
    if (url.includes('/histogram')) {
      return { status: 200, body: histogram };
    }
    if (url.includes('/node?')) {
      const path = new URL(url, 'http://x').searchParams.get('path');
      if (path === MODE_PATH) return { status: 200, body: nodeModePath };
      return {
        status: 404,
        body: { code: 'UnknownPath', message: `no node for path '${path}'` },
      };
    }
    if (url.includes('/highlight?')) {
      const params = new URL(url, 'http://x').searchParams;
      const count = params.get('count');
      return {
        status: 200,
        body: count === '1' ? highlightCount1 : highlightCount0,
      };
    }
    return { status: 404, body: { code: 'UnknownType', message: 'no route' } };
  };

  vi.stubGlobal(
    'fetch',
    vi.fn(async (input: RequestInfo | URL) => {
      const url = String(input);
      log.urls.push(url);
      const { status, body } = route(url);
      return new Response(JSON.stringify(body), {
        status,
        headers: { 'content-type': 'application/json' },
      });
    })
  );
  return log;
}

export function tick(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
