// Rendering the view models to SVG (tree) and plain text (stack, spy,
// toolbar). Pure string output: hosts decide where to put it, tests
// snapshot it.

import { SessionModel } from "./session.js";
import { SpyModel } from "./spyModel.js";
import { StackModel } from "./stackModel.js";
import { TreeModel } from "./treeModel.js";

const FILL: Record<string, string> = {
  white: "#ffffff",
  blue: "#4f7cff",
  black: "#222222",
  green: "#2faf4e",
  red: "#d9372b",
};

// reduction shade bands, light to dark, indexed by ChristmasNode.shade
const SHADES = ["#f4f9f4", "#c4e4c4", "#8fc98f", "#55a855", "#1d7a1d"];

const X_STEP = 44;
const Y_STEP = 52;
const MARGIN = 24;

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function renderTreeSVG(tree: TreeModel): string {
  const layout = tree.layout();
  const visible = tree.visible();
  const geometry = tree.mode === "christmas" ? tree.christmas() : null;
  let maxX = 0;
  let maxY = 0;
  for (const pos of layout.values()) {
    maxX = Math.max(maxX, pos.x);
    maxY = Math.max(maxY, pos.y);
  }
  const width = Math.round(maxX * X_STEP + 2 * MARGIN);
  const height = Math.round(maxY * Y_STEP + 2 * MARGIN);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" data-mode="${tree.mode}">`,
  );

  const at = (key: string): { x: number; y: number } | undefined => {
    const pos = layout.get(key);
    if (!pos) return undefined;
    return { x: MARGIN + pos.x * X_STEP, y: MARGIN + pos.y * Y_STEP };
  };

  // edges first so nodes draw over them
  for (const node of visible) {
    if (node.path.length === 0) continue;
    const here = at(node.key);
    const parent = at(node.path.slice(0, -1).join("."));
    if (here && parent) {
      parts.push(
        `<line x1="${parent.x}" y1="${parent.y}" x2="${here.x}" y2="${here.y}" stroke="#999" />`,
      );
    }
  }

  for (const node of visible) {
    const pos = at(node.key);
    if (!pos) continue;
    if (node.triangle) {
      const color = FILL[node.triangleColor ?? "white"];
      const r = 10;
      parts.push(
        `<polygon points="${pos.x},${pos.y - r} ${pos.x - r},${pos.y + r} ${pos.x + r},${pos.y + r}"` +
          ` fill="${color}" stroke="#333" data-path="${node.key}" data-collapsed="true" />`,
      );
      continue;
    }
    let radius = 7;
    let fill = FILL[node.state] ?? "#ffffff";
    if (geometry) {
      const geo = geometry.get(node.key);
      if (geo) {
        radius = geo.radius;
        // failed nodes keep their red; the shade shows reduction strength
        fill = node.state === "red" ? FILL.red! : SHADES[geo.shade] ?? fill;
      }
    }
    parts.push(
      `<circle cx="${pos.x}" cy="${pos.y}" r="${radius}" fill="${fill}" stroke="#333"` +
        ` data-path="${node.key}" data-state="${node.state}" />`,
    );
    if (node.label) {
      parts.push(
        `<text x="${pos.x + radius + 3}" y="${pos.y - 4}" font-size="9">${esc(node.label)}</text>`,
      );
    }
  }

  // the yellow arrow marks the current node
  if (tree.currentKey !== null) {
    const pos = at(tree.currentKey);
    if (pos) {
      parts.push(
        `<path d="M ${pos.x - 22} ${pos.y} l 10 -6 v 4 h 6 v 4 h -6 v 4 z" fill="#f5c518"` +
          ` data-marker="current" />`,
      );
    }
  }

  parts.push("</svg>");
  return parts.join("\n");
}

export function renderStack(stack: StackModel): string {
  if (stack.frames.length === 0) return "(stack empty)";
  return stack.lines().join("\n");
}

export function renderSpy(spy: SpyModel, limit = 20): string {
  const order = spy.columnOrder();
  const head = ["seq", "event", "constraint", ...order].join(" | ");
  const lines = [head];
  for (const row of spy.rows.slice(-limit)) {
    const cells = order.map((col) => {
      const idx = row.vars.indexOf(col);
      if (idx === -1) return "";
      const before = JSON.stringify(row.before);
      const after = JSON.stringify(row.after);
      return idx === 0 ? `${before}->${after}` : "*";
    });
    lines.push([row.seq, row.event, row.constraint ?? "", ...cells].join(" | "));
  }
  return lines.join("\n");
}

export function renderToolbar(session: SessionModel): string {
  const enabled = session.toolbar();
  return Object.entries(enabled)
    .map(([cmd, on]) => (on ? `[${cmd}]` : ` ${cmd} `))
    .join(" ");
}
