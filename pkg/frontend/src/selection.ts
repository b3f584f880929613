/** Selection model for the case editor.
 *
 * Selectable things: whole elements, whole tables, table rows, table cells,
 * and columns. Exclusion rules:
 *   - at most one column selected, and a column selection clears every
 *     element-level selection (and vice versa);
 *   - a whole-table selection excludes that table's rows and cells;
 *   - a whole-row selection excludes that row's cells;
 *   - rows plus cells of *different* rows may coexist.
 */

export type Ref =
  | { kind: "element"; id: string }
  | { kind: "table"; id: string }
  | { kind: "row"; table: string; row: number }
  | { kind: "cell"; table: string; row: number; col: number }
  | { kind: "column"; caseId: string; index: number };

export function refKey(r: Ref): string {
  switch (r.kind) {
    case "element":
      return `element:${r.id}`;
    case "table":
      return `table:${r.id}`;
    case "row":
      return `row:${r.table}:${r.row}`;
    case "cell":
      return `cell:${r.table}:${r.row}:${r.col}`;
    case "column":
      return `column:${r.caseId}:${r.index}`;
  }
}

export class SelectionState {
  private byKey = new Map<string, Ref>();

  get selected(): Ref[] {
    return [...this.byKey.values()];
  }

  has(r: Ref): boolean {
    return this.byKey.has(refKey(r));
  }

  private drop(pred: (r: Ref) => boolean): void {
    for (const [k, r] of [...this.byKey]) {
      if (pred(r)) this.byKey.delete(k);
    }
  }

  select(r: Ref): this {
    if (r.kind === "column") {
      // a column stands alone: no other column, no element-level selection
      this.byKey.clear();
    } else {
      this.drop((x) => x.kind === "column");
      if (r.kind === "table") {
        this.drop(
          (x) => (x.kind === "row" || x.kind === "cell") && x.table === r.id,
        );
      } else if (r.kind === "row") {
        this.drop((x) => x.kind === "table" && x.id === r.table);
        this.drop(
          (x) => x.kind === "cell" && x.table === r.table && x.row === r.row,
        );
      } else if (r.kind === "cell") {
        this.drop((x) => x.kind === "table" && x.id === r.table);
        this.drop(
          (x) => x.kind === "row" && x.table === r.table && x.row === r.row,
        );
      }
    }
    this.byKey.set(refKey(r), r);
    return this;
  }

  deselect(r: Ref): this {
    this.byKey.delete(refKey(r));
    return this;
  }

  clear(): this {
    this.byKey.clear();
    return this;
  }
}

/** Dependency creation from a selection: all elements but the unique
 * rightmost-column one are sources; ambiguity or annotations are errors. */
export interface DepPlan {
  sources: string[];
  target: string;
}

export function planDependency(
  selection: { id: string; columnIndex: number; annotation: boolean }[],
): DepPlan | { error: string } {
  if (selection.length < 2) return { error: "select at least two elements" };
  if (selection.some((s) => s.annotation))
    return { error: "comments and labels cannot take part in dependencies" };
  const rightmost = Math.max(...selection.map((s) => s.columnIndex));
  const targets = selection.filter((s) => s.columnIndex === rightmost);
  if (targets.length !== 1)
    return { error: "ambiguous target: two elements share the rightmost column" };
  if (selection.length === targets.length)
    return { error: "sources and target cannot share a column" };
  return {
    sources: selection
      .filter((s) => s.columnIndex !== rightmost)
      .map((s) => s.id)
      .sort(),
    target: targets[0].id,
  };
}
