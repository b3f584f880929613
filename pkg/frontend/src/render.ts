/** Pure render functions: (document, selection, compile state) -> a plain
 *  virtual node tree, serializable for snapshot tests. */

import {
  CaseJSON,
  DocumentJSON,
  ElementJSON,
  columnIndexOf,
  decodeValue,
  findElement,
  isAnnotation,
} from "./document.js";
import {
  COLORS,
  DEP_OPACITY,
  DEP_OPACITY_FADED,
  FeedbackMachine,
} from "./feedback.js";
import { SelectionState } from "./selection.js";

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: (VNode | string)[];
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  children: (VNode | string)[] = [],
): VNode {
  return { tag, attrs, children };
}

export function toHTML(n: VNode | string): string {
  if (typeof n === "string") return n;
  const attrs = Object.entries(n.attrs)
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([k, v]) => ` ${k}="${v}"`)
    .join("");
  const inner = n.children.map(toHTML).join("");
  return `<${n.tag}${attrs}>${inner}</${n.tag}>`;
}

function valueText(el: ElementJSON): string {
  if (el.value.t === "empty") return "empty";
  return JSON.stringify(decodeValue(el.value));
}

function elementNode(
  el: ElementJSON,
  selected: boolean,
  feedback: FeedbackMachine | null,
): VNode {
  const fill = selected
    ? COLORS.yellow
    : feedback && !isAnnotation(el)
      ? feedback.color(el.identity)
      : COLORS.white;
  return h(
    "div",
    {
      class: `element shape-${el.shape}`,
      "data-id": el.id,
      "data-identity": el.identity,
      style: `background:${fill}`,
    },
    [valueText(el)],
  );
}

/** Dependency polygon: a triangle when the target is a single value, a
 *  trapezoid when the target is composite. */
export function dependencyShape(target: ElementJSON): "triangle" | "trapezoid" {
  return target.shape === "scalar" ? "triangle" : "trapezoid";
}

function dependencyNode(
  doc: DocumentJSON,
  c: CaseJSON,
  dep: { sources: string[]; target: string },
  faded: boolean,
  color: string,
): VNode {
  const target = findElement(doc, dep.target);
  const shape = target ? dependencyShape(target) : "trapezoid";
  return h("polygon", {
    class: `dependency ${shape}`,
    "data-sources": dep.sources.join(","),
    "data-target": dep.target,
    fill: color,
    opacity: String(faded ? DEP_OPACITY_FADED : DEP_OPACITY),
  });
}

export interface RenderOptions {
  faded?: boolean;
  hideEmptyColumns?: boolean;
}

export function renderCase(
  doc: DocumentJSON,
  caseId: string,
  selection: SelectionState,
  feedback: FeedbackMachine | null,
  opts: RenderOptions = {},
): VNode {
  const c = doc.cases.find((x) => String(x.id.v) === caseId);
  if (!c) return h("div", { class: "missing-case" });
  const cols = c.columns
    .map((col, i) => ({ col, i }))
    .filter(
      ({ col }) =>
        !(
          opts.hideEmptyColumns &&
          (col.kind === "data" || col.kind === "derive") &&
          col.elements.length === 0
        ),
    )
    .map(({ col, i }) => {
      const colSelected = selection.has({
        kind: "column",
        caseId,
        index: i,
      });
      return h(
        "div",
        {
          class: `column kind-${col.kind}${colSelected ? " selected" : ""}`,
          "data-offset": String(col.offset),
        },
        col.elements.map((el) =>
          elementNode(el, selection.has({ kind: "element", id: el.id }), feedback),
        ),
      );
    });
  const deps = h(
    "svg",
    { class: "dependencies" },
    c.dependencies.map((dep) => {
      // an active target pulls its incoming dependencies to amber
      const target = findElement(doc, dep.target);
      const color =
        feedback && target ? feedback.color(target.identity) : COLORS.white;
      return dependencyNode(doc, c, dep, opts.faded ?? false, color);
    }),
  );
  return h("div", { class: "case", "data-case": caseId }, [...cols, deps]);
}

/** Listing view: every case rendered read-only, dependencies blue (they
 *  carry no compile state here). */
export function renderListing(doc: DocumentJSON): VNode {
  return h(
    "div",
    { class: "listing", "data-program": doc.name },
    doc.cases.map((c) =>
      h("div", { class: "case", "data-case": String(c.id.v) }, [
        ...c.columns.map((col) =>
          h(
            "div",
            { class: `column kind-${col.kind}` },
            col.elements.map((el) =>
              h(
                "div",
                { class: `element shape-${el.shape}`, "data-id": el.id },
                [valueText(el)],
              ),
            ),
          ),
        ),
        h(
          "svg",
          { class: "dependencies" },
          c.dependencies.map((dep) =>
            h("polygon", {
              class: "dependency",
              "data-sources": dep.sources.join(","),
              "data-target": dep.target,
              fill: "blue",
              opacity: String(DEP_OPACITY),
            }),
          ),
        ),
      ]),
    ),
  );
}

/** Run form: one field per input identity, disabled until compiled. */
export function renderRunForm(
  inputLabels: string[],
  compiled: boolean,
  outputs: string[] | null,
): VNode {
  return h("form", { class: "run" }, [
    ...inputLabels.map((label, i) =>
      h("label", { class: "run-input" }, [
        label,
        h("input", { name: `input-${i}`, ...(compiled ? {} : { disabled: "" }) }),
      ]),
    ),
    h(
      "button",
      compiled
        ? { type: "submit" }
        : { type: "submit", disabled: "", title: "compile the program first" },
      ["run"],
    ),
    h(
      "div",
      { class: "run-outputs" },
      outputs ? outputs.map((o) => h("output", {}, [o])) : [],
    ),
  ]);
}

export { columnIndexOf };
