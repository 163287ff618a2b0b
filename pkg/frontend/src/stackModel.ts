// Choice stack: the frames of the branch the search is currently
// standing on. Clicking a tree node highlights the frames of the path
// from the root down to it.

import { Json, NodePath } from "./protocol.js";

export interface Frame {
  name: string;
  value: string;
  depth: number;
}

export function frameText(frame: Frame): string {
  return `${frame.name} = ${frame.value} [${frame.depth}]`;
}

export class StackModel {
  frames: Frame[] = [];
  highlighted = new Set<number>();

  reset(): void {
    this.frames = [];
    this.highlighted.clear();
  }

  push(payload: { [key: string]: Json }): void {
    const frame: Frame = {
      name: String(payload.name ?? ""),
      value: String(payload.value ?? ""),
      depth: Number(payload.depth ?? this.frames.length + 1),
    };
    if (frame.depth !== this.frames.length + 1) {
      throw new Error(`frame depth ${frame.depth} at stack height ${this.frames.length}`);
    }
    this.frames.push(frame);
  }

  pop(): void {
    if (this.frames.length === 0) {
      throw new Error("frame pop on empty stack");
    }
    this.frames.pop();
    this.highlighted.clear();
  }

  // node click: highlight the frame at every level along the node's path
  highlightForNode(path: NodePath): number {
    this.highlighted.clear();
    const count = Math.min(path.length, this.frames.length);
    for (let i = 0; i < count; i++) this.highlighted.add(i);
    return count;
  }

  lines(): string[] {
    return this.frames.map(
      (frame, i) => (this.highlighted.has(i) ? "> " : "  ") + frameText(frame),
    );
  }
}
