import { describe, expect, it, vi } from 'vitest';

import type { TreeNodeView } from '../src/api.js';
import { intensityToColor } from '../src/color.js';
import { layoutTree, renderTree } from '../src/tree.js';
import { fixtures } from './helpers.js';

const NODES: TreeNodeView[] = [
  { path: 'root', label: 'root', parent: null, intensity: 0, subtree_size: 4 },
  { path: 'root/a', label: 'a', parent: 'root', intensity: 0.5, subtree_size: 2 },
  { path: 'root/a/x', label: 'x', parent: 'root/a', intensity: 1, subtree_size: 1 },
  { path: 'root/b', label: 'b', parent: 'root', intensity: 0, subtree_size: 1 },
];

describe('layoutTree', () => {
  it('places parents strictly left of their children', () => {
    const layout = layoutTree(NODES, new Set());
    const byPath = new Map(layout.nodes.map((n) => [n.node.path, n]));
    for (const edge of layout.edges) {
      expect(edge.from.x).toBeLessThan(edge.to.x);
    }
    expect(byPath.get('root')!.depth).toBe(0);
    expect(byPath.get('root/a/x')!.depth).toBe(2);
  });

  it('centers a parent on its children rows', () => {
    const layout = layoutTree(NODES, new Set());
    const byPath = new Map(layout.nodes.map((n) => [n.node.path, n]));
    const a = byPath.get('root/a')!;
    const b = byPath.get('root/b')!;
    const root = byPath.get('root')!;
    expect(root.y).toBeCloseTo((a.y + b.y) / 2, 6);
  });

  it('collapsing hides the subtree and reports hidden descendants', () => {
    const layout = layoutTree(NODES, new Set(['root/a']));
    const paths = layout.nodes.map((n) => n.node.path);
    expect(paths).toContain('root/a');
    expect(paths).not.toContain('root/a/x');
    const a = layout.nodes.find((n) => n.node.path === 'root/a')!;
    expect(a.collapsed).toBe(true);
    expect(a.hiddenDescendants).toBe(1);
  });

  it('handles the recorded tree fixture', () => {
    const layout = layoutTree(fixtures.treeCv.nodes, new Set());
    expect(layout.nodes).toHaveLength(fixtures.treeCv.nodes.length);
    expect(layout.edges).toHaveLength(fixtures.treeCv.nodes.length - 1);
  });
});

describe('renderTree', () => {
  it('maps intensity to white-to-red fill', () => {
    const host = document.createElement('div');
    renderTree(host, NODES, new Set(), {
      onNodeClick: () => {},
      onNodeDoubleClick: () => {},
    });
    const white = host.querySelector('[data-path="root"] rect')!;
    const red = host.querySelector('[data-path="root/a/x"] rect')!;
    expect(white.getAttribute('fill')).toBe('rgb(255, 255, 255)');
    expect(red.getAttribute('fill')).toBe('rgb(255, 0, 0)');
    expect(intensityToColor(0.5)).toBe('rgb(255, 128, 128)');
  });

  it('shows a subtree-size badge on collapsed nodes', () => {
    const host = document.createElement('div');
    renderTree(host, NODES, new Set(['root/a']), {
      onNodeClick: () => {},
      onNodeDoubleClick: () => {},
    });
    const badge = host.querySelector('[data-path="root/a"] .tree-node-badge');
    expect(badge?.textContent).toBe('+1');
    expect(host.querySelector('[data-path="root/a/x"]')).toBeNull();
  });

  it('wires click and double-click per node', () => {
    const host = document.createElement('div');
    const onClick = vi.fn();
    const onDouble = vi.fn();
    renderTree(host, NODES, new Set(), {
      onNodeClick: onClick,
      onNodeDoubleClick: onDouble,
    });
    const node = host.querySelector('[data-path="root/a"]')!;
    node.dispatchEvent(new MouseEvent('click', { bubbles: true }));
    node.dispatchEvent(new MouseEvent('dblclick', { bubbles: true }));
    expect(onClick).toHaveBeenCalledWith('root/a');
    expect(onDouble).toHaveBeenCalledWith('root/a');
  });

  it('renders the recorded fixture to stable DOM', () => {
    const host = document.createElement('div');
    renderTree(host, fixtures.treeCv.nodes, new Set(), {
      onNodeClick: () => {},
      onNodeDoubleClick: () => {},
    });
    expect(host.innerHTML).toMatchSnapshot();
  });
});
