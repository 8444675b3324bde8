/**
 * Left-to-right execution-path tree.
 *
 * The leftmost node is the root RPC; edges indicate direct invocation.
 * Node fill encodes the active metric's intensity (white → red). Double-
 * clicking a node hides its subtree and shows a size badge instead, all
 * client-side: the server always returns the full tree.
 */

import type { TreeNodeView } from './api.js';
import { intensityToColor, labelColorFor } from './color.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export const NODE_WIDTH = 156;
export const NODE_HEIGHT = 30;
export const COLUMN_GAP = 52;
export const ROW_GAP = 14;
const MARGIN = 16;

export interface PositionedNode {
  node: TreeNodeView;
  depth: number;
  x: number;
  y: number;
  collapsed: boolean;
  hiddenDescendants: number;
}

export interface TreeLayout {
  nodes: PositionedNode[];
  edges: Array<{ from: PositionedNode; to: PositionedNode }>;
  width: number;
  height: number;
}

/**
 * Tidy left-to-right layout over the visible part of the tree.
 *
 * Nodes arrive parent-first (the API guarantees it); children of a
 * collapsed node are hidden. Leaves take consecutive rows, inner nodes
 * center on their children.
 */
export function layoutTree(
  nodes: TreeNodeView[],
  collapsed: ReadonlySet<string>
): TreeLayout {
  const children = new Map<string, TreeNodeView[]>();
  let root: TreeNodeView | null = null;
  for (const node of nodes) {
    if (node.parent === null) {
      root = node;
    } else {
      const siblings = children.get(node.parent) ?? [];
      siblings.push(node);
      children.set(node.parent, siblings);
    }
  }
  if (root === null) {
    return { nodes: [], edges: [], width: 0, height: 0 };
  }

  const positioned: PositionedNode[] = [];
  const edges: TreeLayout['edges'] = [];
  let nextRow = 0;
  let maxDepth = 0;

  const place = (node: TreeNodeView, depth: number): PositionedNode => {
    maxDepth = Math.max(maxDepth, depth);
    const isCollapsed = collapsed.has(node.path);
    const visibleChildren = isCollapsed ? [] : children.get(node.path) ?? [];
    const entry: PositionedNode = {
      node,
      depth,
      x: MARGIN + depth * (NODE_WIDTH + COLUMN_GAP),
      y: 0,
      collapsed: isCollapsed,
      hiddenDescendants: isCollapsed ? node.subtree_size - 1 : 0,
    };
    positioned.push(entry);
    if (visibleChildren.length === 0) {
      entry.y = MARGIN + nextRow * (NODE_HEIGHT + ROW_GAP);
      nextRow += 1;
    } else {
      const placedChildren = visibleChildren.map((c) => {
        const child = place(c, depth + 1);
        edges.push({ from: entry, to: child });
        return child;
      });
      const first = placedChildren[0]!;
      const last = placedChildren[placedChildren.length - 1]!;
      entry.y = (first.y + last.y) / 2;
    }
    return entry;
  };

  place(root, 0);
  return {
    nodes: positioned,
    edges,
    width: MARGIN * 2 + (maxDepth + 1) * NODE_WIDTH + maxDepth * COLUMN_GAP,
    height: MARGIN * 2 + Math.max(nextRow, 1) * (NODE_HEIGHT + ROW_GAP) - ROW_GAP,
  };
}

export interface TreeCallbacks {
  onNodeClick: (path: string) => void;
  onNodeDoubleClick: (path: string) => void;
}

export function renderTree(
  container: HTMLElement,
  nodes: TreeNodeView[],
  collapsed: ReadonlySet<string>,
  callbacks: TreeCallbacks
): void {
  const layout = layoutTree(nodes, collapsed);
  container.replaceChildren();

  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('width', String(layout.width));
  svg.setAttribute('height', String(layout.height));
  svg.setAttribute('class', 'tree-svg');
  svg.setAttribute('data-testid', 'tree');

  for (const edge of layout.edges) {
    const path = document.createElementNS(SVG_NS, 'path');
    const x1 = edge.from.x + NODE_WIDTH;
    const y1 = edge.from.y + NODE_HEIGHT / 2;
    const x2 = edge.to.x;
    const y2 = edge.to.y + NODE_HEIGHT / 2;
    const mid = (x1 + x2) / 2;
    path.setAttribute('d', `M ${x1} ${y1} C ${mid} ${y1}, ${mid} ${y2}, ${x2} ${y2}`);
    path.setAttribute('class', 'tree-edge');
    svg.appendChild(path);
  }

  for (const entry of layout.nodes) {
    const group = document.createElementNS(SVG_NS, 'g');
    group.setAttribute('class', 'tree-node');
    group.setAttribute('data-path', entry.node.path);
    group.setAttribute('data-intensity', entry.node.intensity.toFixed(4));

    const rect = document.createElementNS(SVG_NS, 'rect');
    rect.setAttribute('x', String(entry.x));
    rect.setAttribute('y', String(entry.y));
    rect.setAttribute('width', String(NODE_WIDTH));
    rect.setAttribute('height', String(NODE_HEIGHT));
    rect.setAttribute('rx', '6');
    rect.setAttribute('fill', intensityToColor(entry.node.intensity));
    rect.setAttribute('class', 'tree-node-box');
    group.appendChild(rect);

    const text = document.createElementNS(SVG_NS, 'text');
    text.setAttribute('x', String(entry.x + 10));
    text.setAttribute('y', String(entry.y + NODE_HEIGHT / 2 + 4));
    text.setAttribute('fill', labelColorFor(entry.node.intensity));
    text.setAttribute('class', 'tree-node-label');
    text.textContent = truncate(entry.node.label, 18);
    group.appendChild(text);

    if (entry.collapsed && entry.hiddenDescendants > 0) {
      const badge = document.createElementNS(SVG_NS, 'text');
      badge.setAttribute('x', String(entry.x + NODE_WIDTH - 8));
      badge.setAttribute('y', String(entry.y + NODE_HEIGHT / 2 + 4));
      badge.setAttribute('text-anchor', 'end');
      badge.setAttribute('class', 'tree-node-badge');
      badge.textContent = `+${entry.hiddenDescendants}`;
      group.appendChild(badge);
    }

    const title = document.createElementNS(SVG_NS, 'title');
    title.textContent = `${decodePath(entry.node.path)}\nintensity ${entry.node.intensity.toFixed(3)}`;
    group.appendChild(title);

    group.addEventListener('click', () => callbacks.onNodeClick(entry.node.path));
    group.addEventListener('dblclick', (event) => {
      event.preventDefault();
      callbacks.onNodeDoubleClick(entry.node.path);
    });
    svg.appendChild(group);
  }

  container.appendChild(svg);
}

function truncate(label: string, max: number): string {
  return label.length <= max ? label : label.slice(0, max - 1) + '…';
}

export function decodePath(encoded: string): string {
  return encoded
    .split('/')
    .map((segment) => decodeURIComponent(segment))
    .join(' → ');
}
