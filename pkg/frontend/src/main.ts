/**
 * Dashboard wiring: one tree, one histogram, a pie popover, and the two
 * linked selections between them. Stale in-flight responses are dropped
 * (last interaction wins) and API errors surface as toasts or inline at
 * the range selector.
 */

import { ApiClient, ApiError } from './api.js';
import type { Metric, TreeView } from './api.js';
import { HistogramPanel } from './histogram.js';
import { renderPie } from './pie.js';
import {
  ViewState,
  clearSelection,
  initialState,
  selectMetric,
  selectRange,
  selectRequestType,
  toggleCollapsed,
  toggleCountSelection,
} from './state.js';
import { renderTree } from './tree.js';
import { showToast } from './toast.js';

const HIGHLIGHT_BINS = 40;

export class Dashboard {
  private state: ViewState = initialState();
  private treeView: TreeView | null = null;
  private histogram: HistogramPanel;
  private epoch = 0;

  private readonly typeSelect: HTMLSelectElement;
  private readonly metricSelect: HTMLSelectElement;
  private readonly metricBadge: HTMLElement;
  private readonly clearButton: HTMLButtonElement;
  private readonly rangeHint: HTMLElement;
  private readonly treeHost: HTMLElement;
  private readonly pieHost: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient = new ApiClient()
  ) {
    root.innerHTML = `
      <header class="topbar">
        <span class="brand">tracelens</span>
        <label>request type
          <select data-testid="type-select"></select>
        </label>
        <label>color by
          <select data-testid="metric-select">
            <option value="cv_invocations">invocation-count CV</option>
            <option value="cv_duration">duration CV</option>
          </select>
        </label>
        <span class="metric-badge" data-testid="metric-badge"></span>
        <button class="clear-button" data-testid="clear-selection" hidden>
          clear selection
        </button>
      </header>
      <main class="panels">
        <section class="panel tree-panel">
          <h2>RPC execution paths</h2>
          <div class="tree-host" data-testid="tree-host"></div>
        </section>
        <section class="panel histogram-panel">
          <h2>End-to-end response time</h2>
          <div class="histogram-host" data-testid="histogram-host"></div>
          <div class="range-hint" data-testid="range-hint"></div>
        </section>
      </main>
      <div class="pie-host" data-testid="pie-host" hidden></div>
    `;
    this.typeSelect = root.querySelector('[data-testid=type-select]')!;
    this.metricSelect = root.querySelector('[data-testid=metric-select]')!;
    this.metricBadge = root.querySelector('[data-testid=metric-badge]')!;
    this.clearButton = root.querySelector('[data-testid=clear-selection]')!;
    this.rangeHint = root.querySelector('[data-testid=range-hint]')!;
    this.treeHost = root.querySelector('[data-testid=tree-host]')!;
    this.pieHost = root.querySelector('[data-testid=pie-host]')!;

    this.histogram = new HistogramPanel(
      root.querySelector('[data-testid=histogram-host]')!,
      {
        onRangeSelect: (lo, hi) => void this.onRangeSelect(lo, hi),
        onRangeRejected: () => {
          this.rangeHint.textContent =
            'range covers every trace — nothing to compare against';
        },
      }
    );

    this.typeSelect.addEventListener('change', () => {
      void this.loadRequestType(this.typeSelect.value);
    });
    this.metricSelect.addEventListener('change', () => {
      this.state = selectMetric(this.state, this.metricSelect.value as Metric);
      void this.refreshTree();
    });
    this.clearButton.addEventListener('click', () => void this.onClearSelection());
  }

  /** Bump the epoch; stale async completions check it and bail. */
  private nextEpoch(): number {
    this.epoch += 1;
    return this.epoch;
  }

  async init(): Promise<void> {
    try {
      const types = await this.api.requestTypes();
      this.typeSelect.replaceChildren(
        ...types.map((t) => {
          const option = document.createElement('option');
          option.value = t.request_type;
          option.textContent = `${t.request_type} (${t.n_traces})`;
          return option;
        })
      );
      if (types.length > 0) {
        await this.loadRequestType(types[0]!.request_type);
      } else {
        this.treeHost.textContent = 'no snapshots loaded';
      }
    } catch (error) {
      this.reportError(error);
    }
  }

  async loadRequestType(requestType: string): Promise<void> {
    const epoch = this.nextEpoch();
    this.state = selectRequestType(this.state, requestType);
    this.typeSelect.value = requestType;
    this.hidePie();
    try {
      const [tree, histogram] = await Promise.all([
        this.api.tree(requestType, this.state.metric),
        this.api.histogram(requestType, HIGHLIGHT_BINS),
      ]);
      if (epoch !== this.epoch) return;
      this.treeView = tree;
      this.histogram.setData(histogram);
      this.histogram.setAppliedRange(null);
      this.renderTreeView();
      this.updateChrome();
    } catch (error) {
      this.reportError(error);
    }
  }

  /** Re-fetch CV colors for the current metric (selection cleared). */
  private async refreshTree(): Promise<void> {
    const requestType = this.state.requestType;
    if (requestType === null) return;
    const epoch = this.nextEpoch();
    this.state = clearSelection(this.state);
    try {
      const tree = await this.api.tree(requestType, this.state.metric);
      if (epoch !== this.epoch) return;
      this.treeView = tree;
      this.histogram.setHighlight(null);
      this.histogram.setAppliedRange(null);
      this.renderTreeView();
      this.updateChrome();
    } catch (error) {
      this.reportError(error);
    }
  }

  private renderTreeView(): void {
    if (!this.treeView) return;
    renderTree(this.treeHost, this.treeView.nodes, this.state.collapsed, {
      onNodeClick: (path) => void this.onNodeClick(path),
      onNodeDoubleClick: (path) => this.onNodeDoubleClick(path),
    });
  }

  private updateChrome(): void {
    const selection = this.state.selection;
    if (selection.kind === 'range') {
      this.metricBadge.textContent = 'KL vs complement';
    } else {
      this.metricBadge.textContent =
        this.state.metric === 'cv_invocations'
          ? 'CV of invocation counts'
          : 'CV of per-trace durations';
    }
    this.clearButton.hidden = selection.kind === 'none';
    if (selection.kind !== 'range') this.rangeHint.textContent = '';
  }

  async onNodeClick(path: string): Promise<void> {
    if (this.state.requestType === null) return;
    try {
      const detail = await this.api.node(this.state.requestType, path);
      this.pieHost.hidden = false;
      renderPie(this.pieHost, detail, {
        onSliceClick: (slicePath, count) => void this.onSliceClick(slicePath, count),
        onClose: () => this.hidePie(),
      });
    } catch (error) {
      this.reportError(error);
    }
  }

  onNodeDoubleClick(path: string): void {
    if (!this.treeView) return;
    const existing = new Set(this.treeView.nodes.map((n) => n.path));
    this.state = toggleCollapsed(this.state, path, existing);
    this.renderTreeView();
  }

  async onSliceClick(path: string, count: number): Promise<void> {
    const requestType = this.state.requestType;
    if (requestType === null) return;
    const epoch = this.nextEpoch();
    const previous = this.state.selection;
    this.state = toggleCountSelection(this.state, path, count);

    if (this.state.selection.kind === 'none') {
      // re-click toggled the overlay off
      this.histogram.setHighlight(null);
      this.updateChrome();
      return;
    }
    // a count selection replaces any active range recolor
    if (previous.kind === 'range') {
      await this.refreshTreeKeepingSelection(epoch);
    }
    try {
      const highlight = await this.api.highlight(
        requestType,
        path,
        count,
        HIGHLIGHT_BINS
      );
      if (epoch !== this.epoch) return;
      this.histogram.setData(highlight.histogram);
      this.histogram.setHighlight(highlight.highlighted);
      this.histogram.setAppliedRange(null);
      this.updateChrome();
    } catch (error) {
      this.reportError(error);
    }
  }

  private async refreshTreeKeepingSelection(epoch: number): Promise<void> {
    const requestType = this.state.requestType;
    if (requestType === null) return;
    const tree = await this.api.tree(requestType, this.state.metric);
    if (epoch !== this.epoch) return;
    this.treeView = tree;
    this.renderTreeView();
  }

  async onRangeSelect(loUs: number, hiUs: number): Promise<void> {
    const requestType = this.state.requestType;
    if (requestType === null) return;
    const epoch = this.nextEpoch();
    this.state = selectRange(this.state, loUs, hiUs);
    this.rangeHint.textContent = '';
    try {
      const tree = await this.api.recolor(requestType, loUs, hiUs);
      if (epoch !== this.epoch) return;
      this.treeView = tree;
      this.histogram.setHighlight(null);
      this.histogram.setAppliedRange({ loUs, hiUs });
      this.renderTreeView();
      this.updateChrome();
    } catch (error) {
      if (error instanceof ApiError && error.status === 400) {
        // surfaced inline at the slider rather than as a toast
        this.state = clearSelection(this.state);
        this.rangeHint.textContent = error.message;
        this.updateChrome();
        return;
      }
      this.reportError(error);
    }
  }

  async onClearSelection(): Promise<void> {
    await this.refreshTree();
  }

  private hidePie(): void {
    this.pieHost.hidden = true;
    this.pieHost.replaceChildren();
  }

  private reportError(error: unknown): void {
    if (error instanceof ApiError) {
      showToast(`${error.code}: ${error.message}`);
    } else {
      showToast(String(error));
    }
  }

  /** Test hook: the current state snapshot. */
  get viewState(): ViewState {
    return this.state;
  }
}

export function mount(root: HTMLElement, api?: ApiClient): Dashboard {
  const dashboard = new Dashboard(root, api);
  void dashboard.init();
  return dashboard;
}

const rootElement = typeof document !== 'undefined' && document.getElementById('app');
if (rootElement) {
  mount(rootElement);
}
