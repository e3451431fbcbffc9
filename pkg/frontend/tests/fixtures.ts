import type { Explanation } from "../src/types.js";

/** Hand-built explanation for a two-atom molecule (one fragment). */
export function tinyExplanation(): Explanation {
  return {
    smiles: "CC",
    prediction: -1.25,
    atom_weights: [0, 1],
    bond_weights: [0],
    bonds: [[0, 1]],
    fragment_weights: [0.42],
    connection_weights: [0.0],
    fragment_contributions: [0.3],
    embedding: [0.1, 0.2],
    atoms_in_fragments: [{ fragment: 0, smiles: "CC", atoms: [0, 1] }],
    connections: [{ frag_a: 0, frag_b: 0, kind: "self", weight: 0.0 }],
    layout: {
      coords: [[0, 0], [1, 0]],
      bonds: [{ a1: 0, a2: 1, order: "single" }],
    },
  };
}

/** Salt-like explanation: two components joined by a virtual connection. */
export function saltExplanation(): Explanation {
  return {
    smiles: "CC.[Cl-]",
    prediction: 0.5,
    atom_weights: [0, 0.4, 1],
    bond_weights: [1],
    bonds: [[0, 1]],
    fragment_weights: [0.2, 0.8],
    connection_weights: [0.1, 0.2, 0.9],
    fragment_contributions: [-0.6, 0.9],
    embedding: [0, 0],
    atoms_in_fragments: [
      { fragment: 0, smiles: "CC", atoms: [0, 1] },
      { fragment: 1, smiles: "[Cl-]", atoms: [2] },
    ],
    connections: [
      { frag_a: 0, frag_b: 0, kind: "self", weight: 0.1 },
      { frag_a: 1, frag_b: 1, kind: "self", weight: 0.2 },
      { frag_a: 0, frag_b: 1, kind: "virtual", weight: 0.9 },
    ],
    layout: {
      coords: [[0, 0], [1, 0.4], [3, 0]],
      bonds: [{ a1: 0, a2: 1, order: "single" }],
    },
  };
}
