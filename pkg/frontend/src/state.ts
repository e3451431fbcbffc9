// View-state transitions for the edit loop. A monotonically increasing
// request token guards against out-of-order responses so the display never
// shows weights from a molecule other than the one rendered.

import type { Explanation, HistoryEntry, Overlay, ViewState } from "./types.js";

export class Store {
  state: ViewState;
  private listeners: ((s: ViewState) => void)[] = [];
  private requestSeq = 0;
  private latestApplied = 0;

  constructor(initial: ViewState) {
    this.state = initial;
  }

  subscribe(fn: (s: ViewState) => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  setSmilesInput(smiles: string): void {
    this.state = {
      ...this.state,
      currentSmiles: smiles,
      stale: this.state.lastExplanation !== null &&
        this.state.lastExplanation.smiles !== smiles,
    };
    this.emit();
  }

  setOverlay(overlay: Overlay): void {
    this.state = { ...this.state, overlay };
    this.emit();
  }

  setModel(model: string | null): void {
    this.state = { ...this.state, selectedModel: model };
    this.emit();
  }

  beginRequest(): number {
    this.requestSeq += 1;
    this.state = { ...this.state, pending: true, error: null };
    this.emit();
    return this.requestSeq;
  }

  /** Apply a successful explanation unless a newer request already won. */
  applyExplanation(token: number, exp: Explanation): boolean {
    if (token <= this.latestApplied) return false;
    this.latestApplied = token;
    const entry: HistoryEntry = {
      smiles: exp.smiles,
      prediction: exp.prediction,
    };
    this.state = {
      ...this.state,
      lastExplanation: exp,
      editHistory: [...this.state.editHistory, entry],
      stale: this.state.currentSmiles !== exp.smiles,
      error: null,
      pending: token !== this.requestSeq ? this.state.pending : false,
    };
    this.emit();
    return true;
  }

  /** Record a failure; the previous explanation stays on screen. */
  applyError(token: number, message: string): boolean {
    if (token <= this.latestApplied) return false;
    this.latestApplied = token;
    this.state = {
      ...this.state,
      error: message,
      pending: token !== this.requestSeq ? this.state.pending : false,
      stale: this.state.lastExplanation !== null &&
        this.state.lastExplanation.smiles !== this.state.currentSmiles,
    };
    this.emit();
    return true;
  }
}
