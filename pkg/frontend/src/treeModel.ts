// Search-tree view model. A pure fold over the run's event stream:
// feeding the same events always produces the same picture, which is what
// the replay snapshots pin down.

import { Json, NodePath, pathKey } from "./protocol.js";

export type NodeColor = "white" | "blue" | "black" | "green" | "red";

export interface NodeStats {
  event_count: number;
  size_before: number;
  size_after: number;
  reduction_pct: number;
}

export interface NodeView {
  key: string;
  path: NodePath;
  label: string;
  state: NodeColor;
  visitOrder: number | null;
  stats: NodeStats | null;
  children: string[];
}

export interface ChristmasNode {
  radius: number;
  shade: number; // 0..4, darker means more reduction
}

export type TreeMode = "plain" | "christmas";

const EMPTY_STATS: NodeStats = {
  event_count: 0,
  size_before: 0,
  size_after: 0,
  reduction_pct: 0,
};

export class TreeModel {
  nodes = new Map<string, NodeView>();
  collapsed = new Set<string>();
  mode: TreeMode = "plain";
  scaling: "sqrt" | "linear" = "sqrt";
  // the yellow arrow: where the search is right now
  currentKey: string | null = null;

  reset(): void {
    // restart semantics: the old picture is gone, nodes of the new run
    // start white and recolor as their events arrive
    this.nodes.clear();
    this.collapsed.clear();
    this.currentKey = null;
  }

  repaintWhite(): void {
    for (const node of this.nodes.values()) {
      node.state = "white";
      node.visitOrder = null;
      node.stats = null;
    }
    this.currentKey = null;
  }

  apply(name: string, payload: { [key: string]: Json }): void {
    if (name === "node_created") {
      const path = (payload.path as number[]) ?? [];
      const key = pathKey(path);
      this.nodes.set(key, {
        key,
        path,
        label: String(payload.label ?? ""),
        state: "white",
        visitOrder: null,
        stats: null,
        children: [],
      });
      if (path.length > 0) {
        const parent = this.nodes.get(pathKey(path.slice(0, -1)));
        if (parent && !parent.children.includes(key)) {
          parent.children.push(key);
        }
      }
    } else if (name === "node_visit") {
      const key = pathKey((payload.path as number[]) ?? []);
      const node = this.nodes.get(key);
      if (node) {
        node.state = "blue";
        node.visitOrder = typeof payload.order === "number" ? payload.order : null;
      }
      this.currentKey = key;
    } else if (name === "node_done") {
      const key = pathKey((payload.path as number[]) ?? []);
      const node = this.nodes.get(key);
      if (node) {
        node.state = payload.state as NodeColor;
        node.stats = (payload.stats as unknown as NodeStats) ?? null;
      }
    }
  }

  get(path: NodePath): NodeView | undefined {
    return this.nodes.get(pathKey(path));
  }

  root(): NodeView | undefined {
    return this.nodes.get("");
  }

  stateCounts(): Record<string, number> {
    const counts: Record<string, number> = {};
    for (const node of this.nodes.values()) {
      counts[node.state] = (counts[node.state] ?? 0) + 1;
    }
    return counts;
  }

  toggleCollapse(path: NodePath): void {
    const key = pathKey(path);
    if (this.collapsed.has(key)) {
      this.collapsed.delete(key);
    } else if (this.nodes.has(key)) {
      this.collapsed.add(key);
    }
  }

  // Aggregated color of a collapsed subtree's triangle: a solution
  // anywhere wins; a fully-failed explored subtree shows red; anything
  // visited shows blue; an untouched subtree stays white.
  collapseColor(path: NodePath): NodeColor {
    const colors: NodeColor[] = [];
    const walk = (key: string): void => {
      const node = this.nodes.get(key);
      if (!node) return;
      colors.push(node.state);
      for (const child of node.children) walk(child);
    };
    const rootNode = this.nodes.get(pathKey(path));
    if (!rootNode) return "white";
    for (const child of rootNode.children) walk(child);
    if (colors.length === 0) colors.push(rootNode.state);
    if (colors.includes("green")) return "green";
    const visited = colors.filter((c) => c !== "white" && c !== "black");
    if (colors.includes("white")) {
      return visited.length > 0 ? "blue" : "white";
    }
    if (visited.length > 0 && visited.every((c) => c === "red")) return "red";
    return visited.length > 0 ? "blue" : "white";
  }

  // Nodes to draw: descendants of collapsed roots are hidden, the
  // collapsed root itself renders as a triangle with the aggregate color.
  visible(): Array<NodeView & { triangle: boolean; triangleColor?: NodeColor }> {
    const hidden = new Set<string>();
    for (const key of this.collapsed) {
      const node = this.nodes.get(key);
      if (!node) continue;
      const stack = [...node.children];
      while (stack.length > 0) {
        const k = stack.pop()!;
        hidden.add(k);
        const child = this.nodes.get(k);
        if (child) stack.push(...child.children);
      }
    }
    const out: Array<NodeView & { triangle: boolean; triangleColor?: NodeColor }> = [];
    for (const node of this.nodes.values()) {
      if (hidden.has(node.key)) continue;
      if (this.collapsed.has(node.key)) {
        out.push({ ...node, triangle: true, triangleColor: this.collapseColor(node.path) });
      } else {
        out.push({ ...node, triangle: false });
      }
    }
    return out;
  }

  // Geometry for the statistics rendering: radius follows each node's
  // share of all propagation events, shade buckets its reduction
  // percentage into five 20% bands.
  christmas(rMin = 4.0, rMax = 18.0, scaling?: "sqrt" | "linear"): Map<string, ChristmasNode> {
    const mode = scaling ?? this.scaling;
    let maxEvents = 0;
    for (const node of this.nodes.values()) {
      maxEvents = Math.max(maxEvents, (node.stats ?? EMPTY_STATS).event_count);
    }
    const geometry = new Map<string, ChristmasNode>();
    for (const node of this.nodes.values()) {
      const stats = node.stats ?? EMPTY_STATS;
      let ratio = maxEvents === 0 ? 0 : stats.event_count / maxEvents;
      if (mode === "sqrt") ratio = Math.sqrt(ratio);
      const radius = Math.round((rMin + (rMax - rMin) * ratio) * 1000) / 1000;
      const shade = Math.min(4, Math.floor(stats.reduction_pct / 20));
      geometry.set(node.key, { radius, shade });
    }
    return geometry;
  }

  // Tidy layered layout: leaves get consecutive x slots in tree order,
  // interior nodes sit midway over their children, y is the depth.
  layout(): Map<string, { x: number; y: number }> {
    const positions = new Map<string, { x: number; y: number }>();
    const visibleKeys = new Set(this.visible().map((n) => n.key));
    let nextLeafX = 0;
    const place = (key: string): number | null => {
      if (!visibleKeys.has(key)) return null;
      const node = this.nodes.get(key);
      if (!node) return null;
      const childXs: number[] = [];
      if (!this.collapsed.has(key)) {
        for (const child of node.children) {
          const x = place(child);
          if (x !== null) childXs.push(x);
        }
      }
      const x =
        childXs.length === 0
          ? nextLeafX++
          : (Math.min(...childXs) + Math.max(...childXs)) / 2;
      positions.set(key, { x, y: node.path.length });
      return x;
    };
    if (this.nodes.has("")) place("");
    return positions;
  }
}
