/**
 * End-to-end latency histogram with two linked interactions:
 *
 * - a highlight overlay drawn on top of the base bars when a count class
 *   is selected from the pie chart,
 * - a drag-brush range selector that applies on release (each application
 *   is a server round-trip over the full path set, so no live updates).
 */

import type { HistogramData } from './api.js';
import { rangeIsApplicable } from './state.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

const WIDTH = 560;
const HEIGHT = 260;
const MARGIN = { top: 12, right: 14, bottom: 34, left: 48 };

export interface HistogramCallbacks {
  /** Fired on brush release with an applicable (non-total) range. */
  onRangeSelect: (loUs: number, hiUs: number) => void;
  /** Fired when a brush release covers the full range (apply disabled). */
  onRangeRejected?: () => void;
}

interface Scale {
  x0: number;
  y0: number;
  plotWidth: number;
  plotHeight: number;
  minUs: number;
  maxUs: number;
  maxCount: number;
}

export function latencyAt(scale: Scale, pixelX: number): number {
  const ratio = (pixelX - scale.x0) / scale.plotWidth;
  const clamped = Math.min(Math.max(ratio, 0), 1);
  return scale.minUs + clamped * (scale.maxUs - scale.minUs);
}

function buildScale(data: HistogramData): Scale {
  return {
    x0: MARGIN.left,
    y0: MARGIN.top,
    plotWidth: WIDTH - MARGIN.left - MARGIN.right,
    plotHeight: HEIGHT - MARGIN.top - MARGIN.bottom,
    minUs: data.bin_edges[0] ?? 0,
    maxUs: data.bin_edges[data.bin_edges.length - 1] ?? 1,
    maxCount: Math.max(...data.counts, 1),
  };
}

function formatUs(us: number): string {
  if (us >= 1_000_000) return `${(us / 1_000_000).toFixed(1)}s`;
  if (us >= 1_000) return `${(us / 1_000).toFixed(0)}ms`;
  return `${Math.round(us)}µs`;
}

export class HistogramPanel {
  private data: HistogramData | null = null;
  private highlighted: number[] | null = null;
  private brush: { startX: number; currentX: number; active: boolean } = {
    startX: 0,
    currentX: 0,
    active: false,
  };
  private appliedRange: { loUs: number; hiUs: number } | null = null;
  private scale: Scale | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly callbacks: HistogramCallbacks
  ) {}

  setData(data: HistogramData): void {
    this.data = data;
    this.highlighted = null;
    this.render();
  }

  setHighlight(highlighted: number[] | null): void {
    this.highlighted = highlighted;
    this.render();
  }

  setAppliedRange(range: { loUs: number; hiUs: number } | null): void {
    this.appliedRange = range;
    this.render();
  }

  /** Programmatic range application; the drag-brush funnels into this. */
  applyRange(loUs: number, hiUs: number): void {
    if (!this.data) return;
    const scale = buildScale(this.data);
    if (!rangeIsApplicable(loUs, hiUs, scale.minUs, scale.maxUs)) {
      this.callbacks.onRangeRejected?.();
      return;
    }
    this.callbacks.onRangeSelect(Math.round(loUs), Math.round(hiUs));
  }

  render(): void {
    this.container.replaceChildren();
    if (!this.data) return;
    const data = this.data;
    const scale = buildScale(data);
    this.scale = scale;

    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('width', String(WIDTH));
    svg.setAttribute('height', String(HEIGHT));
    svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute('class', 'histogram-svg');
    svg.setAttribute('data-testid', 'histogram');

    const baseline = document.createElementNS(SVG_NS, 'line');
    baseline.setAttribute('x1', String(scale.x0));
    baseline.setAttribute('x2', String(scale.x0 + scale.plotWidth));
    baseline.setAttribute('y1', String(scale.y0 + scale.plotHeight));
    baseline.setAttribute('y2', String(scale.y0 + scale.plotHeight));
    baseline.setAttribute('class', 'histogram-axis');
    svg.appendChild(baseline);

    const span = scale.maxUs - scale.minUs || 1;
    data.counts.forEach((count, i) => {
      const left = data.bin_edges[i]!;
      const right = data.bin_edges[i + 1]!;
      const x = scale.x0 + ((left - scale.minUs) / span) * scale.plotWidth;
      const width = Math.max(((right - left) / span) * scale.plotWidth - 1, 1);
      const height = (count / scale.maxCount) * scale.plotHeight;

      const bar = document.createElementNS(SVG_NS, 'rect');
      bar.setAttribute('x', String(x));
      bar.setAttribute('y', String(scale.y0 + scale.plotHeight - height));
      bar.setAttribute('width', String(width));
      bar.setAttribute('height', String(height));
      bar.setAttribute('class', 'histogram-bar');
      bar.setAttribute('data-bin', String(i));
      bar.setAttribute('data-count', String(count));
      svg.appendChild(bar);

      const subset = this.highlighted?.[i] ?? 0;
      if (subset > 0) {
        const overlayHeight = (subset / scale.maxCount) * scale.plotHeight;
        const overlay = document.createElementNS(SVG_NS, 'rect');
        overlay.setAttribute('x', String(x));
        overlay.setAttribute(
          'y',
          String(scale.y0 + scale.plotHeight - overlayHeight)
        );
        overlay.setAttribute('width', String(width));
        overlay.setAttribute('height', String(overlayHeight));
        overlay.setAttribute('class', 'histogram-highlight');
        overlay.setAttribute('data-bin', String(i));
        overlay.setAttribute('data-subset', String(subset));
        svg.appendChild(overlay);
      }
    });

    if (this.appliedRange) {
      const lo = Math.max(this.appliedRange.loUs, scale.minUs);
      const hi = Math.min(this.appliedRange.hiUs, scale.maxUs);
      const x = scale.x0 + ((lo - scale.minUs) / span) * scale.plotWidth;
      const width = ((hi - lo) / span) * scale.plotWidth;
      const region = document.createElementNS(SVG_NS, 'rect');
      region.setAttribute('x', String(x));
      region.setAttribute('y', String(scale.y0));
      region.setAttribute('width', String(Math.max(width, 1)));
      region.setAttribute('height', String(scale.plotHeight));
      region.setAttribute('class', 'histogram-range');
      region.setAttribute('data-testid', 'applied-range');
      svg.appendChild(region);
    }

    for (const tick of [scale.minUs, (scale.minUs + scale.maxUs) / 2, scale.maxUs]) {
      const label = document.createElementNS(SVG_NS, 'text');
      const x = scale.x0 + ((tick - scale.minUs) / span) * scale.plotWidth;
      label.setAttribute('x', String(x));
      label.setAttribute('y', String(HEIGHT - 10));
      label.setAttribute('text-anchor', 'middle');
      label.setAttribute('class', 'histogram-tick');
      label.textContent = formatUs(tick);
      svg.appendChild(label);
    }

    this.wireBrush(svg);
    this.container.appendChild(svg);
  }

  private wireBrush(svg: SVGSVGElement): void {
    const overlay = document.createElementNS(SVG_NS, 'rect');
    const scale = this.scale!;
    overlay.setAttribute('x', String(scale.x0));
    overlay.setAttribute('y', String(scale.y0));
    overlay.setAttribute('width', String(scale.plotWidth));
    overlay.setAttribute('height', String(scale.plotHeight));
    overlay.setAttribute('fill', 'transparent');
    overlay.setAttribute('class', 'histogram-brush-capture');
    overlay.setAttribute('data-testid', 'brush-capture');

    const toLocalX = (event: MouseEvent): number => {
      const rect = svg.getBoundingClientRect();
      // jsdom reports a zero rect; offsetX-style fallback keeps tests honest
      return rect.width > 0 ? event.clientX - rect.left : event.clientX;
    };

    overlay.addEventListener('mousedown', (event) => {
      const x = toLocalX(event);
      this.brush = { startX: x, currentX: x, active: true };
    });
    overlay.addEventListener('mousemove', (event) => {
      if (!this.brush.active) return;
      this.brush.currentX = toLocalX(event);
    });
    overlay.addEventListener('mouseup', (event) => {
      if (!this.brush.active) return;
      this.brush.currentX = toLocalX(event);
      this.brush.active = false;
      const lo = latencyAt(scale, Math.min(this.brush.startX, this.brush.currentX));
      const hi = latencyAt(scale, Math.max(this.brush.startX, this.brush.currentX));
      if (hi - lo > 0) {
        this.applyRange(lo, hi);
      }
    });
    svg.appendChild(overlay);
  }
}
