/**
 * Dashboard view state and its transitions.
 *
 * Exactly one selection is ever active: either a node + count class
 * (histogram highlighting) or a latency range (tree recoloring), never
 * both. Collapse state is purely client-side and restricted to paths
 * that exist in the currently loaded tree.
 */

import type { Metric } from './api.js';

export type Selection =
  | { kind: 'none' }
  | { kind: 'count'; path: string; count: number }
  | { kind: 'range'; loUs: number; hiUs: number };

export interface ViewState {
  requestType: string | null;
  metric: Metric;
  collapsed: Set<string>;
  selection: Selection;
}

export function initialState(): ViewState {
  return {
    requestType: null,
    metric: 'cv_invocations',
    collapsed: new Set(),
    selection: { kind: 'none' },
  };
}

export function selectRequestType(state: ViewState, requestType: string): ViewState {
  // switching corpus invalidates collapse state and any selection
  return {
    requestType,
    metric: state.metric,
    collapsed: new Set(),
    selection: { kind: 'none' },
  };
}

export function selectMetric(state: ViewState, metric: Metric): ViewState {
  return { ...state, metric };
}

/** Toggle a count-class selection; re-selecting the same slice clears it. */
export function toggleCountSelection(
  state: ViewState,
  path: string,
  count: number
): ViewState {
  const current = state.selection;
  if (current.kind === 'count' && current.path === path && current.count === count) {
    return { ...state, selection: { kind: 'none' } };
  }
  return { ...state, selection: { kind: 'count', path, count } };
}

export function selectRange(state: ViewState, loUs: number, hiUs: number): ViewState {
  return { ...state, selection: { kind: 'range', loUs, hiUs } };
}

export function clearSelection(state: ViewState): ViewState {
  return { ...state, selection: { kind: 'none' } };
}

/** Collapse/expand a subtree; unknown paths are ignored. */
export function toggleCollapsed(
  state: ViewState,
  path: string,
  existingPaths: ReadonlySet<string>
): ViewState {
  if (!existingPaths.has(path)) return state;
  const collapsed = new Set(state.collapsed);
  if (collapsed.has(path)) {
    collapsed.delete(path);
  } else {
    collapsed.add(path);
  }
  return { ...state, collapsed };
}

/** Drop collapsed entries that no longer exist (after a reload). */
export function pruneCollapsed(
  state: ViewState,
  existingPaths: ReadonlySet<string>
): ViewState {
  const collapsed = new Set(
    [...state.collapsed].filter((p) => existingPaths.has(p))
  );
  return { ...state, collapsed };
}

/**
 * A range applies only when it selects a non-empty proper subset of the
 * latency axis; covering every bin leaves nothing to compare against.
 */
export function rangeIsApplicable(
  loUs: number,
  hiUs: number,
  minUs: number,
  maxUs: number
): boolean {
  if (loUs > hiUs) return false;
  if (loUs <= minUs && hiUs >= maxUs) return false;
  return hiUs >= minUs && loUs <= maxUs;
}
