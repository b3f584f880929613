/** Client for the workspace-service HTTP+JSON API. */

import { DocumentJSON } from "./document.js";
import { CompileEvent } from "./feedback.js";

export interface ProgramSummary {
  id: string;
  name: string;
  revision: number;
  compiled: boolean;
}

export interface RunResult {
  outputs_json: unknown[];
  input_labels: string[];
  output_labels: string[];
}

type Fetch = typeof fetch;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

/** Parse an SSE body into its data records. Exposed for tests. */
export function parseSSE(text: string): CompileEvent[] {
  const events: CompileEvent[] = [];
  for (const line of text.split(/\r?\n/)) {
    if (line.startsWith("data: ")) {
      events.push(JSON.parse(line.slice("data: ".length)));
    }
  }
  return events;
}

export class WorkspaceClient {
  constructor(
    private base: string,
    private fetchImpl: Fetch = fetch,
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const r = await this.fetchImpl(this.base + path, init);
    if (!r.ok) throw new ApiError(r.status, await r.text());
    return (await r.json()) as T;
  }

  listPrograms(): Promise<ProgramSummary[]> {
    return this.json("/programs");
  }

  getProgram(id: string): Promise<ProgramSummary & { document: DocumentJSON }> {
    return this.json(`/programs/${id}`);
  }

  createProgram(document: DocumentJSON): Promise<ProgramSummary> {
    return this.json("/programs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ document }),
    });
  }

  putProgram(
    id: string,
    document: DocumentJSON,
    revision: number,
  ): Promise<ProgramSummary> {
    return this.json(`/programs/${id}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ document, revision }),
    });
  }

  async deleteProgram(id: string): Promise<void> {
    const r = await this.fetchImpl(`${this.base}/programs/${id}`, {
      method: "DELETE",
    });
    if (!r.ok) throw new ApiError(r.status, await r.text());
  }

  run(id: string, inputs: unknown[]): Promise<RunResult> {
    return this.json(`/programs/${id}/run`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ inputs }),
    });
  }

  setUses(id: string, names: string[]): Promise<ProgramSummary> {
    return this.json(`/programs/${id}/uses`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ names }),
    });
  }

  async exportText(id: string): Promise<string> {
    const r = await this.fetchImpl(`${this.base}/programs/${id}/export`);
    if (!r.ok) throw new ApiError(r.status, await r.text());
    return r.text();
  }

  /** Start a compile and invoke onEvent for every SSE record. */
  async compile(
    id: string,
    onEvent: (e: CompileEvent) => void,
  ): Promise<void> {
    const r = await this.fetchImpl(`${this.base}/programs/${id}/compile`, {
      method: "POST",
    });
    if (!r.ok) throw new ApiError(r.status, await r.text());
    if (!r.body) {
      for (const e of parseSSE(await r.text())) onEvent(e);
      return;
    }
    const reader = r.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let nl;
      while ((nl = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, nl).trimEnd();
        buffer = buffer.slice(nl + 1);
        if (line.startsWith("data: ")) {
          onEvent(JSON.parse(line.slice("data: ".length)));
        }
      }
    }
    if (buffer.startsWith("data: ")) {
      onEvent(JSON.parse(buffer.slice("data: ".length)));
    }
  }
}
