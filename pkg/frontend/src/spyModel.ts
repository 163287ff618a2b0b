// Propagation spy grid. Rows arrive in event order and are append-only;
// time runs top to bottom. Selecting a row pulls the columns of its
// variables to the front so the action is visible without scrolling.

import { Json } from "./protocol.js";

export interface SpyRow {
  seq: number;
  event: string;
  vars: string[];
  before: Json[];
  after: Json[];
  constraint: string | null;
  internal: boolean;
  node: number[];
}

export class SpyModel {
  rows: SpyRow[] = [];
  columns: string[] = [];
  selected: number | null = null;

  reset(): void {
    this.rows = [];
    this.columns = [];
    this.selected = null;
  }

  append(payload: { [key: string]: Json }): SpyRow {
    const row: SpyRow = {
      seq: Number(payload.seq ?? 0),
      event: String(payload.event ?? ""),
      vars: (payload.vars as string[]) ?? [],
      before: (payload.before as Json[]) ?? [],
      after: (payload.after as Json[]) ?? [],
      constraint: (payload.constraint as string | null) ?? null,
      internal: Boolean(payload.internal),
      node: (payload.node as number[]) ?? [],
    };
    const last = this.rows[this.rows.length - 1];
    if (last && row.seq <= last.seq) {
      throw new Error(`spy rows must arrive in seq order: ${last.seq} then ${row.seq}`);
    }
    this.rows.push(row);
    for (const name of row.vars) {
      if (!this.columns.includes(name)) this.columns.push(name);
    }
    return row;
  }

  // Rearranged column order: the selected row's variables first (in the
  // row's own order), everything else keeping its relative position.
  columnOrder(): string[] {
    if (this.selected === null) return [...this.columns];
    const row = this.rows[this.selected];
    if (!row) return [...this.columns];
    const front = row.vars.filter((v) => this.columns.includes(v));
    const rest = this.columns.filter((c) => !front.includes(c));
    return [...front, ...rest];
  }

  select(index: number): void {
    if (index < 0 || index >= this.rows.length) {
      throw new Error(`no spy row ${index}`);
    }
    this.selected = index;
  }
}
