/**
 * Invocation-count pie chart shown when a tree node is inspected: one
 * slice per count class, labeled with its share of the request set.
 * Clicking a slice drives the histogram highlight.
 */

import type { NodeDetail } from './api.js';
import { decodePath } from './tree.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const SIZE = 220;
const RADIUS = 80;

const SLICE_COLORS = [
  '#60a5fa',
  '#f87171',
  '#4ade80',
  '#fbbf24',
  '#a78bfa',
  '#f472b6',
  '#2dd4bf',
  '#fb923c',
];

export interface PieCallbacks {
  onSliceClick: (path: string, count: number) => void;
  onClose: () => void;
}

function arcPath(cx: number, cy: number, r: number, a0: number, a1: number): string {
  const x0 = cx + r * Math.cos(a0);
  const y0 = cy + r * Math.sin(a0);
  const x1 = cx + r * Math.cos(a1);
  const y1 = cy + r * Math.sin(a1);
  const large = a1 - a0 > Math.PI ? 1 : 0;
  return `M ${cx} ${cy} L ${x0} ${y0} A ${r} ${r} 0 ${large} 1 ${x1} ${y1} Z`;
}

export function renderPie(
  container: HTMLElement,
  detail: NodeDetail,
  callbacks: PieCallbacks
): void {
  container.replaceChildren();
  container.classList.add('pie-popover');

  const heading = document.createElement('div');
  heading.className = 'pie-heading';
  heading.textContent = decodePath(detail.path);
  container.appendChild(heading);

  const close = document.createElement('button');
  close.className = 'pie-close';
  close.textContent = '×';
  close.setAttribute('aria-label', 'close');
  close.addEventListener('click', () => callbacks.onClose());
  container.appendChild(close);

  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('width', String(SIZE));
  svg.setAttribute('height', String(SIZE));
  svg.setAttribute('viewBox', `0 0 ${SIZE} ${SIZE}`);

  const cx = SIZE / 2;
  const cy = SIZE / 2;
  let angle = -Math.PI / 2;
  detail.count_distribution.forEach((slice, i) => {
    const sweep = slice.fraction * 2 * Math.PI;
    const group = document.createElementNS(SVG_NS, 'g');
    group.setAttribute('class', 'pie-slice');
    group.setAttribute('data-count', String(slice.count));
    group.setAttribute('data-fraction', slice.fraction.toFixed(4));

    const path = document.createElementNS(SVG_NS, 'path');
    // a single full-circle slice degenerates; draw a circle instead
    if (slice.fraction >= 0.9999) {
      const circle = document.createElementNS(SVG_NS, 'circle');
      circle.setAttribute('cx', String(cx));
      circle.setAttribute('cy', String(cy));
      circle.setAttribute('r', String(RADIUS));
      circle.setAttribute('fill', SLICE_COLORS[i % SLICE_COLORS.length]!);
      group.appendChild(circle);
    } else {
      path.setAttribute('d', arcPath(cx, cy, RADIUS, angle, angle + sweep));
      path.setAttribute('fill', SLICE_COLORS[i % SLICE_COLORS.length]!);
      group.appendChild(path);
    }

    const mid = angle + sweep / 2;
    const label = document.createElementNS(SVG_NS, 'text');
    label.setAttribute('x', String(cx + (RADIUS + 22) * Math.cos(mid)));
    label.setAttribute('y', String(cy + (RADIUS + 22) * Math.sin(mid) + 4));
    label.setAttribute('text-anchor', 'middle');
    label.setAttribute('class', 'pie-label');
    label.textContent = `${slice.count}×: ${(slice.fraction * 100).toFixed(1)}%`;
    group.appendChild(label);

    const title = document.createElementNS(SVG_NS, 'title');
    title.textContent = `${slice.n_traces} traces with ${slice.count} invocation(s)`;
    group.appendChild(title);

    group.addEventListener('click', () =>
      callbacks.onSliceClick(detail.path, slice.count)
    );
    svg.appendChild(group);
    angle += sweep;
  });

  container.appendChild(svg);

  const summary = detail.duration_summary;
  const stats = document.createElement('div');
  stats.className = 'pie-stats';
  stats.textContent =
    `duration per trace: min ${fmt(summary.min_us)} · p50 ${fmt(summary.p50_us)}` +
    ` · p95 ${fmt(summary.p95_us)} · max ${fmt(summary.max_us)}`;
  container.appendChild(stats);
}

function fmt(us: number): string {
  if (us >= 1_000_000) return `${(us / 1_000_000).toFixed(2)}s`;
  if (us >= 1_000) return `${(us / 1_000).toFixed(1)}ms`;
  return `${Math.round(us)}µs`;
}
