// SVG rendering of a molecule with the five explanation overlays.
// Everything draws from one Explanation payload; switching overlays never
// refetches.

import { contributionSpan, diverging, sequential } from "./colors.js";
import type { Explanation, Overlay } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SCALE = 46;
const PAD = 40;

interface Projected {
  xs: number[];
  ys: number[];
  width: number;
  height: number;
}

function project(exp: Explanation): Projected {
  const coords = exp.layout.coords;
  const minX = Math.min(...coords.map((c) => c[0]));
  const maxX = Math.max(...coords.map((c) => c[0]));
  const minY = Math.min(...coords.map((c) => c[1]));
  const maxY = Math.max(...coords.map((c) => c[1]));
  const xs = coords.map((c) => PAD + (c[0] - minX) * SCALE);
  const ys = coords.map((c) => PAD + (maxY - c[1]) * SCALE);
  return {
    xs,
    ys,
    width: PAD * 2 + (maxX - minX) * SCALE,
    height: PAD * 2 + (maxY - minY) * SCALE,
  };
}

function el(name: string, attrs: Record<string, string | number>): Element {
  const node = document.createElementNS(SVG_NS, name);
  for (const [k, v] of Object.entries(attrs)) {
    node.setAttribute(k, String(v));
  }
  return node;
}

function text(x: number, y: number, content: string,
              attrs: Record<string, string | number> = {}): Element {
  const node = el("text", {
    x, y, "font-size": 11, "text-anchor": "middle", ...attrs,
  });
  node.textContent = content;
  return node;
}

/** Monotone-chain convex hull over point indices. */
export function convexHull(points: [number, number][]): [number, number][] {
  const pts = [...points].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  if (pts.length <= 2) return pts;
  const cross = (o: number[], a: number[], b: number[]) =>
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  const lower: [number, number][] = [];
  for (const p of pts) {
    while (lower.length >= 2 &&
           cross(lower[lower.length - 2], lower[lower.length - 1], p) <= 0) {
      lower.pop();
    }
    lower.push(p);
  }
  const upper: [number, number][] = [];
  for (const p of [...pts].reverse()) {
    while (upper.length >= 2 &&
           cross(upper[upper.length - 2], upper[upper.length - 1], p) <= 0) {
      upper.pop();
    }
    upper.push(p);
  }
  return lower.slice(0, -1).concat(upper.slice(0, -1));
}

function padHull(hull: [number, number][], margin: number): [number, number][] {
  const cx = hull.reduce((s, p) => s + p[0], 0) / hull.length;
  const cy = hull.reduce((s, p) => s + p[1], 0) / hull.length;
  return hull.map(([x, y]) => {
    const dx = x - cx;
    const dy = y - cy;
    const len = Math.hypot(dx, dy) || 1;
    return [x + (dx / len) * margin, y + (dy / len) * margin];
  });
}

function fragmentCentroid(exp: Explanation, proj: Projected,
                          frag: number): [number, number] {
  const atoms = exp.atoms_in_fragments[frag].atoms;
  const cx = atoms.reduce((s, a) => s + proj.xs[a], 0) / atoms.length;
  const cy = atoms.reduce((s, a) => s + proj.ys[a], 0) / atoms.length;
  return [cx, cy];
}

function drawBonds(svg: Element, exp: Explanation, proj: Projected,
                   overlay: Overlay): void {
  exp.layout.bonds.forEach((bond, bi) => {
    const color = overlay === "BOND"
      ? sequential(exp.bond_weights[bi] ?? 0)
      : "#555";
    const width = overlay === "BOND" ? 5 : 2;
    const line = el("line", {
      x1: proj.xs[bond.a1], y1: proj.ys[bond.a1],
      x2: proj.xs[bond.a2], y2: proj.ys[bond.a2],
      stroke: color, "stroke-width": width,
      class: `bond bond-${bond.order}`,
      "data-bond": bi,
    });
    svg.appendChild(line);
    if (bond.order === "double" || bond.order === "triple") {
      const off = 3;
      svg.appendChild(el("line", {
        x1: proj.xs[bond.a1] + off, y1: proj.ys[bond.a1] + off,
        x2: proj.xs[bond.a2] + off, y2: proj.ys[bond.a2] + off,
        stroke: color, "stroke-width": 1, class: "bond-extra",
      }));
    }
  });
}

function drawAtoms(svg: Element, exp: Explanation, proj: Projected,
                   overlay: Overlay): void {
  exp.layout.coords.forEach((_, ai) => {
    const fill = overlay === "ATOM"
      ? sequential(exp.atom_weights[ai] ?? 0)
      : "#ffffff";
    svg.appendChild(el("circle", {
      cx: proj.xs[ai], cy: proj.ys[ai], r: 9,
      fill, stroke: "#333", "stroke-width": 1,
      class: "atom", "data-atom": ai,
      "data-weight": (exp.atom_weights[ai] ?? 0).toFixed(4),
    }));
    svg.appendChild(text(proj.xs[ai], proj.ys[ai] + 3, String(ai),
                         { "font-size": 8, fill: "#333" }));
  });
}

function drawFragmentHulls(svg: Element, exp: Explanation, proj: Projected,
                           overlay: Overlay): void {
  const span = contributionSpan(exp.fragment_contributions);
  exp.atoms_in_fragments.forEach((row) => {
    const pts: [number, number][] = row.atoms.map(
      (a) => [proj.xs[a], proj.ys[a]]);
    const hull = padHull(convexHull(pts), 16);
    const fill = overlay === "CONTRIBUTION"
      ? diverging(exp.fragment_contributions[row.fragment], span)
      : "rgba(120,160,255,0.25)";
    svg.appendChild(el("polygon", {
      points: hull.map((p) => `${p[0]},${p[1]}`).join(" "),
      fill, stroke: "#6688cc", "stroke-width": 1,
      class: "fragment-hull", "data-fragment": row.fragment,
    }));
    const [cx, cy] = fragmentCentroid(exp, proj, row.fragment);
    const label = overlay === "CONTRIBUTION"
      ? exp.fragment_contributions[row.fragment].toFixed(2)
      : String(row.fragment);
    const box = el("rect", {
      x: cx - 14, y: cy - 22, width: 28, height: 14,
      fill: "#2255cc", rx: 2, class: "fragment-label-box",
    });
    svg.appendChild(box);
    svg.appendChild(text(cx, cy - 11, label,
                         { fill: "#fff", class: "fragment-label" }));
  });
}

function drawConnections(svg: Element, exp: Explanation,
                         proj: Projected): void {
  const weights = exp.connections.map((c) => c.weight);
  const maxW = Math.max(...weights, 1e-9);
  exp.connections.forEach((conn, ci) => {
    const [x1, y1] = fragmentCentroid(exp, proj, conn.frag_a);
    const attrs: Record<string, string | number> = {
      stroke: conn.kind === "virtual" ? "#aa44aa" : "#338833",
      "stroke-width": 1.5 + 4 * (conn.weight / maxW),
      class: `connection connection-${conn.kind}`,
      "data-connection": ci,
      fill: "none",
    };
    if (conn.kind === "virtual") {
      attrs["stroke-dasharray"] = "6,4";
    }
    if (conn.kind === "self") {
      svg.appendChild(el("circle", {
        ...attrs, cx: x1, cy: y1 - 18, r: 9,
      }));
      return;
    }
    const [x2, y2] = fragmentCentroid(exp, proj, conn.frag_b);
    svg.appendChild(el("line", { ...attrs, x1, y1, x2, y2 }));
  });
}

function drawLegend(svg: Element, exp: Explanation, proj: Projected,
                    overlay: Overlay): void {
  const g = el("g", { class: "legend" });
  const y = proj.height - 12;
  if (overlay === "CONTRIBUTION") {
    const span = contributionSpan(exp.fragment_contributions);
    [[-span, 0], [0, 60], [span, 120]].forEach(([v, dx]) => {
      g.appendChild(el("rect", {
        x: PAD + dx, y: y - 10, width: 18, height: 10,
        fill: diverging(v, span || 1),
      }));
      g.appendChild(text(PAD + dx + 36, y, v.toFixed(2),
                         { "font-size": 9 }));
    });
  } else {
    [0, 0.5, 1].forEach((v, i) => {
      g.appendChild(el("rect", {
        x: PAD + i * 60, y: y - 10, width: 18, height: 10,
        fill: sequential(v),
      }));
      g.appendChild(text(PAD + i * 60 + 32, y, v.toFixed(1),
                         { "font-size": 9 }));
    });
  }
  svg.appendChild(g);
}

/** Render one molecule with the selected overlay into `container`. */
export function renderMolecule(container: Element, exp: Explanation,
                               overlay: Overlay): void {
  container.innerHTML = "";
  if (!exp.layout.coords.length) {
    return;
  }
  const proj = project(exp);
  const svg = el("svg", {
    width: Math.max(proj.width, 300),
    height: proj.height + 20,
    viewBox: `0 0 ${Math.max(proj.width, 300)} ${proj.height + 20}`,
    class: `molecule overlay-${overlay.toLowerCase()}`,
  });
  if (overlay === "FRAGMENT" || overlay === "CONTRIBUTION") {
    drawFragmentHulls(svg, exp, proj, overlay);
  }
  drawBonds(svg, exp, proj, overlay);
  drawAtoms(svg, exp, proj, overlay);
  if (overlay === "CONNECTION") {
    drawFragmentHulls(svg, exp, proj, overlay);
    drawConnections(svg, exp, proj);
  }
  drawLegend(svg, exp, proj, overlay);
  container.appendChild(svg);
}

/** Atom-to-fragment and connection tables shown beside the drawing. */
export function renderTables(container: Element, exp: Explanation): void {
  container.innerHTML = "";
  const fragTable = document.createElement("table");
  fragTable.className = "fragments-table";
  fragTable.innerHTML =
    "<thead><tr><th>Fragment</th><th>Structure</th><th>Atoms</th>" +
    "<th>Weight</th><th>Contribution</th></tr></thead>";
  const fbody = document.createElement("tbody");
  exp.atoms_in_fragments.forEach((row) => {
    const tr = document.createElement("tr");
    tr.innerHTML =
      `<td>${row.fragment}</td><td>${escapeHtml(row.smiles)}</td>` +
      `<td>${row.atoms.join(" ")}</td>` +
      `<td>${exp.fragment_weights[row.fragment].toFixed(3)}</td>` +
      `<td>${exp.fragment_contributions[row.fragment].toFixed(3)}</td>`;
    fbody.appendChild(tr);
  });
  fragTable.appendChild(fbody);
  container.appendChild(fragTable);

  const connTable = document.createElement("table");
  connTable.className = "connections-table";
  connTable.innerHTML =
    "<thead><tr><th>Frag A</th><th>Frag B</th><th>Kind</th>" +
    "<th>Weight</th></tr></thead>";
  const cbody = document.createElement("tbody");
  exp.connections.forEach((c) => {
    const tr = document.createElement("tr");
    tr.className = `connection-row connection-row-${c.kind}`;
    tr.innerHTML = `<td>${c.frag_a}</td><td>${c.frag_b}</td>` +
      `<td>${c.kind}</td><td>${c.weight.toFixed(3)}</td>`;
    cbody.appendChild(tr);
  });
  connTable.appendChild(cbody);
  container.appendChild(connTable);
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
