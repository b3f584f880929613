/** Types mirroring the workspace-service document JSON. */

export interface TaggedValue {
  t: "empty" | "null" | "bool" | "num" | "text" | "table" | "list" | "obj";
  v?: unknown;
}

export interface ElementJSON {
  id: string;
  identity: string;
  shape: "scalar" | "list" | "table" | "object" | "comment" | "label";
  value: TaggedValue;
}

export interface ColumnJSON {
  kind: "data" | "input" | "derive" | "output";
  offset: number;
  elements: ElementJSON[];
}

export interface DependencyJSON {
  sources: string[];
  target: string;
}

export interface CaseJSON {
  id: TaggedValue;
  columns: ColumnJSON[];
  dependencies: DependencyJSON[];
}

export interface DocumentJSON {
  format_version: string;
  name: string;
  uses: string[];
  cases: CaseJSON[];
  runtime: Record<string, TaggedValue>;
}

/** Decode the tagged wire value into a plain JS value. */
export function decodeValue(tv: TaggedValue): unknown {
  switch (tv.t) {
    case "empty":
      return { empty: tv.v };
    case "null":
      return null;
    case "bool":
    case "text":
      return tv.v;
    case "num":
      return Number(tv.v);
    case "table":
    case "list":
      return (tv.v as TaggedValue[]).map((x) =>
        Array.isArray(x) ? x.map(decodeValue) : decodeValue(x),
      );
    case "obj": {
      const out: Record<string, unknown> = {};
      for (const [k, inner] of Object.entries(tv.v as Record<string, TaggedValue>)) {
        out[k] = decodeValue(inner);
      }
      return out;
    }
  }
}

export function isAnnotation(el: ElementJSON): boolean {
  return el.shape === "comment" || el.shape === "label";
}

export function findElement(doc: DocumentJSON, id: string): ElementJSON | undefined {
  for (const c of doc.cases) {
    for (const col of c.columns) {
      const el = col.elements.find((e) => e.id === id);
      if (el) return el;
    }
  }
  return undefined;
}

export function columnIndexOf(c: CaseJSON, elementId: string): number {
  for (let i = 0; i < c.columns.length; i++) {
    if (c.columns[i].elements.some((e) => e.id === elementId)) return i;
  }
  return -1;
}
