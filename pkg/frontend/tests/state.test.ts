import { describe, expect, it } from 'vitest';

import {
  clearSelection,
  initialState,
  pruneCollapsed,
  rangeIsApplicable,
  selectRange,
  selectRequestType,
  toggleCollapsed,
  toggleCountSelection,
} from '../src/state.js';

describe('selection transitions', () => {
  it('starts with no selection', () => {
    expect(initialState().selection).toEqual({ kind: 'none' });
  });

  it('keeps at most one selection active', () => {
    let state = initialState();
    state = toggleCountSelection(state, 'a/b', 1);
    expect(state.selection).toEqual({ kind: 'count', path: 'a/b', count: 1 });

    state = selectRange(state, 100, 200);
    expect(state.selection).toEqual({ kind: 'range', loUs: 100, hiUs: 200 });

    state = toggleCountSelection(state, 'a/b', 0);
    expect(state.selection.kind).toBe('count');
  });

  it('re-selecting the same slice toggles the selection off', () => {
    let state = toggleCountSelection(initialState(), 'a/b', 1);
    state = toggleCountSelection(state, 'a/b', 1);
    expect(state.selection).toEqual({ kind: 'none' });
  });

  it('a different count class replaces instead of toggling', () => {
    let state = toggleCountSelection(initialState(), 'a/b', 1);
    state = toggleCountSelection(state, 'a/b', 0);
    expect(state.selection).toEqual({ kind: 'count', path: 'a/b', count: 0 });
  });

  it('clearSelection resets to none', () => {
    const state = clearSelection(selectRange(initialState(), 1, 2));
    expect(state.selection).toEqual({ kind: 'none' });
  });

  it('switching request type drops selection and collapse state', () => {
    let state = selectRange(initialState(), 1, 2);
    state = toggleCollapsed(state, 'a', new Set(['a']));
    state = selectRequestType(state, 'other');
    expect(state.selection).toEqual({ kind: 'none' });
    expect(state.collapsed.size).toBe(0);
    expect(state.requestType).toBe('other');
  });
});

describe('collapse state', () => {
  it('only collapses existing paths', () => {
    const existing = new Set(['a', 'a/b']);
    let state = toggleCollapsed(initialState(), 'ghost', existing);
    expect(state.collapsed.size).toBe(0);
    state = toggleCollapsed(state, 'a/b', existing);
    expect([...state.collapsed]).toEqual(['a/b']);
  });

  it('toggling twice expands again', () => {
    const existing = new Set(['a']);
    let state = toggleCollapsed(initialState(), 'a', existing);
    state = toggleCollapsed(state, 'a', existing);
    expect(state.collapsed.size).toBe(0);
  });

  it('prunes collapsed paths that disappeared', () => {
    const existing = new Set(['a', 'b']);
    let state = toggleCollapsed(initialState(), 'a', existing);
    state = toggleCollapsed(state, 'b', existing);
    state = pruneCollapsed(state, new Set(['b']));
    expect([...state.collapsed]).toEqual(['b']);
  });
});

describe('rangeIsApplicable', () => {
  it('rejects inverted and full-coverage ranges', () => {
    expect(rangeIsApplicable(200, 100, 0, 1000)).toBe(false);
    expect(rangeIsApplicable(0, 1000, 0, 1000)).toBe(false);
    expect(rangeIsApplicable(-5, 2000, 0, 1000)).toBe(false);
  });

  it('accepts proper sub-ranges and rejects disjoint ones', () => {
    expect(rangeIsApplicable(100, 500, 0, 1000)).toBe(true);
    expect(rangeIsApplicable(0, 999, 0, 1000)).toBe(true);
    expect(rangeIsApplicable(2000, 3000, 0, 1000)).toBe(false);
  });
});
