// Parameter store: the UI always displays the last server-confirmed value;
// an edit is "pending" (visually distinct) until its reply or a matching
// subscription event lands.

import { ParamEntry, ParamMeta, ParamValue } from "./protocol.js";

export interface ParamState {
  path: string;
  confirmed: ParamValue;
  meta: ParamMeta | null;
  pending: ParamValue | null;
}

export type ParamListener = (state: ParamState) => void;

export class ParamStore {
  private states = new Map<string, ParamState>();
  private listeners: ParamListener[] = [];

  onChange(listener: ParamListener): void {
    this.listeners.push(listener);
  }

  private notify(state: ParamState): void {
    for (const listener of this.listeners) listener(state);
  }

  loadEntries(entries: ParamEntry[]): void {
    for (const entry of entries) {
      const state: ParamState = {
        path: entry.path,
        confirmed: entry.value,
        meta: entry.meta,
        pending: null,
      };
      this.states.set(entry.path, state);
      this.notify(state);
    }
  }

  /** An edit was sent; remember it as unconfirmed. */
  markPending(path: string, value: ParamValue): void {
    const state = this.states.get(path);
    if (!state) return;
    state.pending = value;
    this.notify(state);
  }

  /** A reply or subscription event confirms the committed (clamped) value. */
  confirm(path: string, value: ParamValue): void {
    let state = this.states.get(path);
    if (!state) {
      state = { path, confirmed: value, meta: null, pending: null };
      this.states.set(path, state);
    } else {
      state.confirmed = value;
      state.pending = null;
    }
    this.notify(state);
  }

  get(path: string): ParamState | undefined {
    return this.states.get(path);
  }

  /** Displayed value: always the last confirmed one. */
  displayed(path: string): ParamValue | undefined {
    return this.states.get(path)?.confirmed;
  }

  all(): ParamState[] {
    return [...this.states.values()].sort((a, b) =>
      a.path < b.path ? -1 : a.path > b.path ? 1 : 0,
    );
  }

  groups(): Map<string, ParamState[]> {
    const out = new Map<string, ParamState[]>();
    for (const state of this.all()) {
      const group = state.path.split("/")[1] ?? "";
      if (!out.has(group)) out.set(group, []);
      out.get(group)!.push(state);
    }
    return out;
  }
}
