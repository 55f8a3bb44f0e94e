/**
 * Turn one preset output directory into figure panels.
 *
 * The dispatch follows the manifest: trajectory/SME runs become one panel
 * per run (all trajectories overlaid), master runs combine into a single
 * purity panel, flux scans become one scatter panel per entry, and the
 * landscape preset yields a heatmap (minima marked) plus the diagonal cuts.
 */

import { readdirSync, writeFileSync } from "fs";
import { join } from "path";

import { CsvTable, Manifest, RunConfig, SCHEMAS, column, readCsv,
         readManifest } from "./csv";
import { PALETTE, Series, colormap, heatmap, linePlot } from "./svg";
import { Raster, parseColor } from "./png";

export type ImageFormat = "svg" | "png";

export interface RenderedPanel {
  filename: string;
  svg: string;
}

function trajectoryFiles(dir: string, label: string): string[] {
  return readdirSync(dir)
    .filter((f) => f.startsWith(`${label}_traj`) && f.endsWith(".csv"))
    .sort();
}

function mainProbe(run: RunConfig, table: CsvTable): string {
  for (const name of run.probes) {
    if (table.header.includes(name)) return name;
  }
  const skip = (c: string) =>
    c === "t" || c.startsWith("dq_") || c.startsWith("x_") ||
    c === "norm_drift";
  const fallback = table.header.find((c) => !skip(c));
  if (!fallback) throw new Error(`no plottable column for run ${run.label}`);
  return fallback;
}

function timeUnit(run: RunConfig): string {
  return run.tls ? "t  [1/γ]" : "t  [1/J]";
}

function renderTrajectoryRun(dir: string, run: RunConfig): RenderedPanel {
  const files = trajectoryFiles(dir, run.label);
  if (files.length === 0) {
    throw new Error(`no trajectory files for run ${run.label}`);
  }
  const tables = files.map((f) => readCsv(join(dir, f), SCHEMAS.trajectory));
  const probe = mainProbe(run, tables[0]);
  const series: Series[] = tables.map((table, i) => ({
    label: `traj ${i}`,
    x: column(table, "t"),
    y: column(table, probe),
    color: PALETTE[i % PALETTE.length],
  }));
  const ylabel = probe.startsWith("J") ? `${probe}  [J]` : probe;
  return {
    filename: `${run.label}_${probe}`,
    svg: linePlot({
      title: `${run.label}: conditional ${probe}`,
      xlabel: timeUnit(run),
      ylabel,
      series,
    }),
  };
}

function renderPurityPanel(dir: string, runs: RunConfig[]): RenderedPanel {
  const series: Series[] = runs.map((run, i) => {
    const table = readCsv(join(dir, `${run.label}_master.csv`),
                          SCHEMAS.master);
    return {
      label: run.label,
      x: column(table, "t"),
      y: column(table, "purity"),
      color: PALETTE[i % PALETTE.length],
      dashed: i === 0,
    };
  });
  return {
    filename: "purity",
    svg: linePlot({
      title: "purity of the unconditional state",
      xlabel: "t  [1/J]",
      ylabel: "Tr ρ²",
      series,
    }),
  };
}

function renderScan(dir: string, manifest: Manifest): RenderedPanel[] {
  const panels: RenderedPanel[] = [];
  for (const entry of manifest.scan?.entries ?? []) {
    const table = readCsv(join(dir, `spectrum_${entry.label}.csv`),
                          SCHEMAS.spectrum);
    panels.push({
      filename: `spectrum_${entry.label}`,
      svg: linePlot({
        title: `kinetic spectrum ${entry.label}`,
        xlabel: "θ",
        ylabel: "E  [J]",
        series: [{
          label: entry.label,
          x: column(table, "theta"),
          y: column(table, "energy"),
          color: PALETTE[0],
        }],
        points: true,
      }),
    });
  }
  return panels;
}

export interface LandscapeGrid {
  coords: number[];
  values: number[][];
  minima: { x: number; y: number }[];
}

/** Reassemble the heatmap grid and locate its global-minimum cells. */
export function landscapeGrid(table: CsvTable): LandscapeGrid {
  const coordSet = new Set(table.rows.map((r) => r[0]));
  const coords = Array.from(coordSet).sort((a, b) => a - b);
  const n = coords.length;
  const index = new Map(coords.map((v, i) => [v, i]));
  const values: number[][] = Array.from({ length: n }, () =>
    new Array(n).fill(NaN));
  for (const [p12, p23, v] of table.rows) {
    values[index.get(p12)!][index.get(p23)!] = v;
  }
  let min = Infinity;
  for (const row of values) for (const v of row) if (v < min) min = v;
  const minima: { x: number; y: number }[] = [];
  const tol = 1e-9 * Math.max(1, Math.abs(min));
  for (let i = 0; i < n; i += 1) {
    for (let j = 0; j < n; j += 1) {
      if (values[i][j] <= min + tol) {
        minima.push({ x: coords[i], y: coords[j] });
      }
    }
  }
  return { coords, values, minima };
}

function renderLandscape(dir: string): RenderedPanel[] {
  const grid = landscapeGrid(readCsv(join(dir, "landscape.csv"),
                                     SCHEMAS.landscape));
  const panels: RenderedPanel[] = [{
    filename: "landscape",
    svg: heatmap({
      title: "kinetic phase landscape (minima marked)",
      xlabel: "φ₁−φ₂",
      ylabel: "φ₂−φ₃",
      coords: grid.coords,
      values: grid.values,
      markers: grid.minima,
    }),
  }];
  const cuts = readCsv(join(dir, "landscape_cuts.csv"),
                       SCHEMAS.landscapeCut);
  const phi = column(cuts, "phi");
  const series: Series[] = cuts.header.slice(1).map((name, i) => ({
    label: name,
    x: phi,
    y: column(cuts, name),
    color: PALETTE[i % PALETTE.length],
    dashed: i === 0,
  }));
  panels.push({
    filename: "landscape_cuts",
    svg: linePlot({
      title: "diagonal cut through the landscape",
      xlabel: "φ₁−φ₂ = φ₂−φ₃",
      ylabel: "V  [J]",
      series,
    }),
  });
  return panels;
}

export function renderPanels(dir: string): RenderedPanel[] {
  const manifest = readManifest(dir);
  if (manifest.kind === "landscape") return renderLandscape(dir);
  if (manifest.kind === "spectrum_scan") return renderScan(dir, manifest);
  const panels: RenderedPanel[] = [];
  const masterRuns = manifest.runs.filter((r) => r.engine === "master");
  for (const run of manifest.runs) {
    if (run.engine === "master") continue;
    panels.push(renderTrajectoryRun(dir, run));
  }
  if (masterRuns.length > 0) {
    panels.push(renderPurityPanel(dir, masterRuns));
  }
  if (panels.length === 0) throw new Error(`${dir}: nothing to render`);
  return panels;
}

/** Rasterize the plotted content of a panel (heatmap cells and polylines). */
export function rasterize(svg: string): Buffer {
  const raster = new Raster(640, 420);
  const rectRe = /<rect x="([-\d.]+)" y="([-\d.]+)" width="([-\d.]+)" height="([-\d.]+)" fill="rgb\((\d+),(\d+),(\d+)\)"\/>/g;
  for (const m of svg.matchAll(rectRe)) {
    raster.fillRect(+m[1], +m[2], +m[3], +m[4], [+m[5], +m[6], +m[7]]);
  }
  const polyRe = /<polyline points="([^"]+)" fill="none" stroke="(#[0-9a-f]{6})"/g;
  for (const m of svg.matchAll(polyRe)) {
    const rgb = parseColor(m[2]);
    const pts = m[1].split(" ").map((p) => p.split(",").map(Number));
    for (let i = 1; i < pts.length; i += 1) {
      raster.line(pts[i - 1][0], pts[i - 1][1], pts[i][0], pts[i][1], rgb);
    }
  }
  const circleRe = /<circle cx="([-\d.]+)" cy="([-\d.]+)" r="([-\d.]+)" fill="(#[0-9a-f]{6})"\/>/g;
  for (const m of svg.matchAll(circleRe)) {
    raster.set(+m[1], +m[2], parseColor(m[4]));
  }
  return raster.encode();
}

export function renderPresetDir(dir: string,
                                format: ImageFormat = "svg"): string[] {
  const written: string[] = [];
  for (const panel of renderPanels(dir)) {
    const path = join(dir, `${panel.filename}.${format}`);
    if (format === "svg") {
      writeFileSync(path, panel.svg);
    } else {
      writeFileSync(path, rasterize(panel.svg));
    }
    written.push(path);
  }
  return written;
}
