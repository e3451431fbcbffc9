// Color scales: sequential for attention weights, diverging for
// contributions. Values are clamped; scales carry their own legends.

export function clamp01(x: number): number {
  return Math.max(0, Math.min(1, x));
}

/** Sequential white -> deep orange. */
export function sequential(t: number): string {
  const v = clamp01(t);
  const r = Math.round(255 - 25 * v);
  const g = Math.round(245 - 160 * v);
  const b = Math.round(240 - 205 * v);
  return `rgb(${r},${g},${b})`;
}

/** Diverging blue (negative) -> white -> red (positive); `span` sets the
 * symmetric range. */
export function diverging(value: number, span: number): string {
  if (span <= 0) return "rgb(245,245,245)";
  const t = Math.max(-1, Math.min(1, value / span));
  if (t < 0) {
    const v = -t;
    return `rgb(${Math.round(235 - 175 * v)},${Math.round(238 - 120 * v)},255)`;
  }
  const v = t;
  return `rgb(255,${Math.round(238 - 160 * v)},${Math.round(235 - 175 * v)})`;
}

export function contributionSpan(contributions: number[]): number {
  return contributions.reduce((m, c) => Math.max(m, Math.abs(c)), 0);
}
