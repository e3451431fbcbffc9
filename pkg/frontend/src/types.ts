// Wire types matching the explanation service's JSON responses.

export type ConnectionKind = "regular" | "virtual" | "self";

export interface ConnectionRow {
  frag_a: number;
  frag_b: number;
  kind: ConnectionKind;
  weight: number;
}

export interface FragmentRow {
  fragment: number;
  smiles: string;
  atoms: number[];
}

export interface LayoutBond {
  a1: number;
  a2: number;
  order: string;
}

export interface LayoutResult {
  coords: [number, number][];
  bonds: LayoutBond[];
}

export interface Explanation {
  smiles: string;
  model?: string;
  prediction: number;
  atom_weights: number[];
  bond_weights: number[];
  bonds: [number, number][];
  fragment_weights: number[];
  connection_weights: number[];
  fragment_contributions: number[];
  embedding: number[];
  atoms_in_fragments: FragmentRow[];
  connections: ConnectionRow[];
  layout: LayoutResult;
}

export interface ApiError {
  error: { code: string; message: string };
}

export type Overlay = "ATOM" | "BOND" | "FRAGMENT" | "CONNECTION" | "CONTRIBUTION";

export const OVERLAYS: Overlay[] = [
  "ATOM", "BOND", "FRAGMENT", "CONNECTION", "CONTRIBUTION",
];

export interface HistoryEntry {
  smiles: string;
  prediction: number;
}

export interface ViewState {
  currentSmiles: string;
  selectedModel: string | null;
  overlay: Overlay;
  lastExplanation: Explanation | null;
  editHistory: HistoryEntry[];
  /** true when the text box no longer matches the rendered explanation */
  stale: boolean;
  error: string | null;
  pending: boolean;
}

export function initialState(): ViewState {
  return {
    currentSmiles: "",
    selectedModel: null,
    overlay: "ATOM",
    lastExplanation: null,
    editHistory: [],
    stale: false,
    error: null,
    pending: false,
  };
}
