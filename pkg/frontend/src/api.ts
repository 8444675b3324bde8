/**
 * Typed client for the tracelens query API (/api/v1).
 *
 * Every dashboard interaction goes through these calls and nothing else;
 * path strings returned by the server ('/'-joined percent-escaped
 * segments) are passed back verbatim in query parameters.
 */

export interface RequestTypeInfo {
  request_type: string;
  n_traces: number;
}

export interface TreeNodeView {
  path: string;
  label: string;
  parent: string | null;
  intensity: number;
  subtree_size: number;
}

export interface TreeView {
  request_type: string;
  metric: string;
  n_traces: number;
  nodes: TreeNodeView[];
  selection?: { lo_us: number; hi_us: number; n_selected: number };
}

export interface HistogramData {
  bin_edges: number[];
  counts: number[];
  bin_rule: string;
}

export interface CountSlice {
  count: number;
  n_traces: number;
  fraction: number;
}

export interface NodeDetail {
  path: string;
  count_distribution: CountSlice[];
  duration_summary: {
    min_us: number;
    p50_us: number;
    p95_us: number;
    max_us: number;
  };
}

export interface HighlightData {
  path: string;
  count: number;
  n_selected: number;
  histogram: HistogramData;
  highlighted: number[];
}

export type Metric = 'cv_invocations' | 'cv_duration';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function fetchJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (!response.ok) {
    let code = 'HttpError';
    let message = `${response.status}`;
    try {
      const body = (await response.json()) as { code?: string; message?: string };
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, code, message);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = '/api/v1') {}

  requestTypes(): Promise<RequestTypeInfo[]> {
    return fetchJson(`${this.base}/request-types`);
  }

  tree(requestType: string, metric: Metric): Promise<TreeView> {
    return fetchJson(
      `${this.base}/${encodeURIComponent(requestType)}/tree?metric=${metric}`
    );
  }

  histogram(requestType: string, bins?: number): Promise<HistogramData> {
    const suffix = bins === undefined ? '' : `?bins=${bins}`;
    return fetchJson(
      `${this.base}/${encodeURIComponent(requestType)}/histogram${suffix}`
    );
  }

  node(requestType: string, path: string): Promise<NodeDetail> {
    const params = new URLSearchParams({ path });
    return fetchJson(
      `${this.base}/${encodeURIComponent(requestType)}/node?${params}`
    );
  }

  highlight(
    requestType: string,
    path: string,
    count: number,
    bins?: number
  ): Promise<HighlightData> {
    const params = new URLSearchParams({ path, count: String(count) });
    if (bins !== undefined) params.set('bins', String(bins));
    return fetchJson(
      `${this.base}/${encodeURIComponent(requestType)}/highlight?${params}`
    );
  }

  recolor(requestType: string, loUs: number, hiUs: number): Promise<TreeView> {
    const params = new URLSearchParams({ lo: String(loUs), hi: String(hiUs) });
    return fetchJson(
      `${this.base}/${encodeURIComponent(requestType)}/recolor?${params}`
    );
  }
}
