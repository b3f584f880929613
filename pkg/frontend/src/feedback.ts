/** Compile-feedback color state machine.
 *
 * Identities move pending -> active -> solved | failed, with failed ->
 * active allowed for retries. Colors: pending and failed are red, active is
 * amber, solved is green. The stream carries exactly one terminal record.
 */

export const COLORS = {
  red: "#D9534F",
  amber: "#F0AD4E",
  green: "#5CB85C",
  yellow: "#FFF3B0",
  white: "#FFFFFF",
} as const;

export const DEP_OPACITY = 0.45;
export const DEP_OPACITY_FADED = 0.15;

export type IdentityState = "pending" | "active" | "solved" | "failed";

export interface StateEvent {
  identity: string;
  state: IdentityState;
  stats?: unknown;
}

export interface TerminalEvent {
  result: "success" | "failure";
  failed: string[];
}

export type CompileEvent = StateEvent | TerminalEvent;

export function isTerminal(e: CompileEvent): e is TerminalEvent {
  return "result" in e;
}

const LEGAL: Record<string, IdentityState[]> = {
  "": ["pending"],
  pending: ["active"],
  active: ["solved", "failed"],
  failed: ["active"],
  solved: [],
};

export class ProtocolViolation extends Error {}

export class FeedbackMachine {
  readonly states = new Map<string, IdentityState>();
  terminal: TerminalEvent | null = null;
  readonly rejected: { event: CompileEvent; reason: string }[] = [];

  /** Apply one stream record; illegal records are rejected and logged. */
  apply(e: CompileEvent): boolean {
    const reason = this.check(e);
    if (reason !== null) {
      this.rejected.push({ event: e, reason });
      return false;
    }
    if (isTerminal(e)) {
      this.terminal = e;
    } else {
      this.states.set(e.identity, e.state);
    }
    return true;
  }

  private check(e: CompileEvent): string | null {
    if (this.terminal) return "record after terminal";
    if (isTerminal(e)) return null;
    const from = this.states.get(e.identity) ?? "";
    if (!LEGAL[from].includes(e.state))
      return `illegal transition ${from || "(new)"} -> ${e.state}`;
    return null;
  }

  /** Strict replay of a whole stream; throws on any violation. */
  static replay(events: CompileEvent[]): FeedbackMachine {
    const m = new FeedbackMachine();
    for (const e of events) {
      if (!m.apply(e)) {
        throw new ProtocolViolation(m.rejected[m.rejected.length - 1].reason);
      }
    }
    if (!m.terminal) throw new ProtocolViolation("stream ended without terminal");
    return m;
  }

  /** Display color for an identity; untracked identities stay white. */
  color(identity: string): string {
    switch (this.states.get(identity)) {
      case "pending":
      case "failed":
        return COLORS.red;
      case "active":
        return COLORS.amber;
      case "solved":
        return COLORS.green;
      default:
        return COLORS.white;
    }
  }

  get done(): boolean {
    return this.terminal !== null;
  }
}
