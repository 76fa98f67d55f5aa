/**
 * Minimal deterministic SVG assembly: plain string building, no DOM, so the
 * output bytes depend only on the input table.
 */

export function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Scale {
  (value: number): number;
}

/** Affine map [d0, d1] -> [r0, r1]; a degenerate domain maps to the middle. */
export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export class SvgBuilder {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    );
    this.parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${path}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = ""): void {
    const strokeAttr = stroke ? ` stroke="${stroke}" stroke-width="0.5"` : "";
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"${strokeAttr}/>`,
    );
  }

  text(
    x: number,
    y: number,
    content: string,
    opts: { size?: number; anchor?: string; cls?: string; fill?: string; rotate?: number } = {},
  ): void {
    const { size = 11, anchor = "start", cls = "", fill = "#222", rotate = 0 } = opts;
    const classAttr = cls ? ` class="${cls}"` : "";
    const transform = rotate ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}" ` +
        `fill="${fill}"${classAttr}${transform}>${escapeText(content)}</text>`,
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function fmt(value: number): string {
  // fixed decimals keep coordinates deterministic and diffs small
  return value.toFixed(2).replace(/\.00$/, "");
}

/** Blue -> red map over [0, 1]; out-of-range values are clamped. */
export function heatColour(t: number): string {
  if (Number.isNaN(t)) return "#dddddd";
  const clamped = Math.min(1, Math.max(0, t));
  const r = Math.round(40 + 215 * clamped);
  const g = Math.round(70 + 60 * (1 - Math.abs(clamped - 0.5) * 2));
  const b = Math.round(40 + 215 * (1 - clamped));
  return `rgb(${r},${g},${b})`;
}

export const METHOD_COLOURS: Record<string, string> = {
  coloured: "#4361ee",
  "point-to-plane": "#e63946",
};

export function methodColour(method: string, index: number): string {
  return METHOD_COLOURS[method] ?? ["#2d6a4f", "#b5179e", "#ff9f1c"][index % 3];
}
