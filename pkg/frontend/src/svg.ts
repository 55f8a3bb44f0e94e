/**
 * Deterministic SVG figure builder: line plots, scatter plots and grid
 * heatmaps with fixed dimensions, palette and number formatting, so that
 * identical inputs always serialize to identical bytes.
 */

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { left: 64, right: 16, top: 34, bottom: 46 };

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

const fmt = (v: number): string => {
  if (!Number.isFinite(v)) return "0";
  const s = v.toFixed(3);
  return s === "-0.000" ? "0.000" : s;
};

const ticks = (lo: number, hi: number, n = 5): number[] => {
  const out: number[] = [];
  for (let i = 0; i <= n; i += 1) out.push(lo + ((hi - lo) * i) / n);
  return out;
};

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color?: string;
  dashed?: boolean;
}

export interface PlotSpec {
  title: string;
  xlabel: string;
  ylabel: string;
  series: Series[];
  hlines?: number[];
  points?: boolean;
}

interface Range {
  lo: number;
  hi: number;
}

function dataRange(values: number[][], pad = 0.05): Range {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of values) {
    for (const v of arr) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const span = hi - lo;
  return { lo: lo - pad * span, hi: hi + pad * span };
}

class Canvas {
  parts: string[] = [];

  add(part: string): void {
    this.parts.push(part);
  }

  toString(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      ...this.parts,
      "</svg>",
      "",
    ].join("\n");
  }
}

function frame(
  canvas: Canvas,
  title: string,
  xlabel: string,
  ylabel: string,
  xr: Range,
  yr: Range,
): { sx: (v: number) => number; sy: (v: number) => number } {
  const { left, right, top, bottom } = MARGIN;
  const iw = WIDTH - left - right;
  const ih = HEIGHT - top - bottom;
  const sx = (v: number) => left + ((v - xr.lo) / (xr.hi - xr.lo)) * iw;
  const sy = (v: number) => top + ih - ((v - yr.lo) / (yr.hi - yr.lo)) * ih;
  canvas.add(
    `<rect x="${left}" y="${top}" width="${iw}" height="${ih}" fill="none" stroke="#000000" stroke-width="1"/>`,
  );
  for (const t of ticks(xr.lo, xr.hi)) {
    const px = fmt(sx(t));
    canvas.add(
      `<line x1="${px}" y1="${top + ih}" x2="${px}" y2="${top + ih + 4}" stroke="#000000"/>`,
    );
    canvas.add(
      `<text x="${px}" y="${top + ih + 18}" font-size="11" text-anchor="middle" font-family="sans-serif">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(yr.lo, yr.hi)) {
    const py = fmt(sy(t));
    canvas.add(
      `<line x1="${left - 4}" y1="${py}" x2="${left}" y2="${py}" stroke="#000000"/>`,
    );
    canvas.add(
      `<text x="${left - 7}" y="${py}" font-size="11" text-anchor="end" dominant-baseline="middle" font-family="sans-serif">${fmt(t)}</text>`,
    );
  }
  canvas.add(
    `<text x="${WIDTH / 2}" y="${HEIGHT - 10}" font-size="13" text-anchor="middle" font-family="sans-serif">${xlabel}</text>`,
  );
  canvas.add(
    `<text x="16" y="${HEIGHT / 2}" font-size="13" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 16 ${HEIGHT / 2})">${ylabel}</text>`,
  );
  canvas.add(
    `<text x="${WIDTH / 2}" y="20" font-size="14" text-anchor="middle" font-family="sans-serif">${title}</text>`,
  );
  return { sx, sy };
}

export function linePlot(spec: PlotSpec): string {
  const canvas = new Canvas();
  const xr = dataRange(spec.series.map((s) => s.x), 0.0);
  const yvals = spec.series.map((s) => s.y).concat([spec.hlines ?? []]);
  const yr = dataRange(yvals);
  const { sx, sy } = frame(canvas, spec.title, spec.xlabel, spec.ylabel, xr, yr);
  for (const level of spec.hlines ?? []) {
    const py = fmt(sy(level));
    canvas.add(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" y2="${py}" stroke="#bbbbbb" stroke-width="0.7" stroke-dasharray="5,4"/>`,
    );
  }
  spec.series.forEach((s, i) => {
    const color = s.color ?? PALETTE[i % PALETTE.length];
    if (spec.points) {
      for (let k = 0; k < s.x.length; k += 1) {
        canvas.add(
          `<circle cx="${fmt(sx(s.x[k]))}" cy="${fmt(sy(s.y[k]))}" r="1.4" fill="${color}"/>`,
        );
      }
    } else {
      const pts = s.x
        .map((vx, k) => `${fmt(sx(vx))},${fmt(sy(s.y[k]))}`)
        .join(" ");
      const dash = s.dashed ? ' stroke-dasharray="6,3"' : "";
      canvas.add(
        `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.2"${dash}/>`,
      );
    }
    canvas.add(
      `<text x="${WIDTH - MARGIN.right - 6}" y="${MARGIN.top + 14 + 14 * i}" font-size="11" text-anchor="end" fill="${color}" font-family="sans-serif">${s.label}</text>`,
    );
  });
  return canvas.toString();
}

/** Five-stop blue-to-yellow colormap, linearly interpolated. */
export function colormap(t: number): [number, number, number] {
  const stops: [number, number, number][] = [
    [13, 8, 135],
    [84, 2, 163],
    [156, 23, 158],
    [237, 121, 83],
    [240, 249, 33],
  ];
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(pos));
  const f = pos - i;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * f);
  return [
    mix(stops[i][0], stops[i + 1][0]),
    mix(stops[i][1], stops[i + 1][1]),
    mix(stops[i][2], stops[i + 1][2]),
  ];
}

export interface HeatmapSpec {
  title: string;
  xlabel: string;
  ylabel: string;
  coords: number[];
  /** values[i][j] is the cell at x=coords[i], y=coords[j] */
  values: number[][];
  markers?: { x: number; y: number }[];
}

export function heatmap(spec: HeatmapSpec): string {
  const canvas = new Canvas();
  const n = spec.coords.length;
  const cell = spec.coords[1] - spec.coords[0];
  const xr = { lo: spec.coords[0], hi: spec.coords[n - 1] + cell };
  const { sx, sy } = frame(
    canvas, spec.title, spec.xlabel, spec.ylabel, xr, xr,
  );
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of spec.values) {
    for (const v of row) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  const scale = hi > lo ? 1 / (hi - lo) : 0;
  for (let i = 0; i < n; i += 1) {
    for (let j = 0; j < n; j += 1) {
      const [r, g, b] = colormap((spec.values[i][j] - lo) * scale);
      const x0 = sx(spec.coords[i]);
      const y0 = sy(spec.coords[j] + cell);
      const w = sx(spec.coords[i] + cell) - x0;
      const h = sy(spec.coords[j]) - y0;
      canvas.add(
        `<rect x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(w)}" height="${fmt(h)}" fill="rgb(${r},${g},${b})"/>`,
      );
    }
  }
  for (const m of spec.markers ?? []) {
    canvas.add(
      `<circle cx="${fmt(sx(m.x + cell / 2))}" cy="${fmt(sy(m.y + cell / 2))}" r="5" fill="none" stroke="#ffffff" stroke-width="1.6"/>`,
    );
  }
  return canvas.toString();
}
