/**
 * Schema-checked readers for the simulator's CSV and manifest outputs.
 *
 * Every CSV begins with `# schema=<name>.v<k>` followed by optional metadata
 * comments and a header row. A missing or mismatched schema is a hard error:
 * the renderer refuses to guess at unknown layouts.
 */

import { readFileSync } from "fs";
import { join } from "path";

export const SCHEMAS = {
  trajectory: "ringmon.trajectory.v1",
  master: "ringmon.master.v1",
  spectrum: "ringmon.spectrum.v1",
  landscape: "ringmon.landscape.v1",
  landscapeCut: "ringmon.landscape-cut.v1",
  manifest: "ringmon.manifest.v1",
} as const;

export class SchemaError extends Error {}

export interface CsvTable {
  header: string[];
  rows: number[][];
  comments: Record<string, string>;
}

export function readCsv(path: string, expectedSchema: string): CsvTable {
  const lines = readFileSync(path, "utf8").split("\n");
  if (lines.length === 0 || !lines[0].startsWith("# schema=")) {
    throw new SchemaError(`${path}: missing schema line`);
  }
  const found = lines[0].slice("# schema=".length).trim();
  if (found !== expectedSchema) {
    throw new SchemaError(
      `${path}: schema ${found}, expected ${expectedSchema}`,
    );
  }
  const comments: Record<string, string> = {};
  let i = 1;
  while (i < lines.length && lines[i].startsWith("#")) {
    const body = lines[i].slice(1).trim();
    const eq = body.indexOf("=");
    if (eq > 0) comments[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
    i += 1;
  }
  const header = lines[i].split(",");
  const rows: number[][] = [];
  for (let k = i + 1; k < lines.length; k += 1) {
    const line = lines[k].trim();
    if (!line) continue;
    const row = line.split(",").map(Number);
    if (row.some((v) => Number.isNaN(v))) {
      throw new SchemaError(`${path}: non-numeric row ${k + 1}`);
    }
    rows.push(row);
  }
  return { header, rows, comments };
}

export function column(table: CsvTable, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`column ${name} not in [${table.header.join(",")}]`);
  }
  return table.rows.map((r) => r[idx]);
}

export interface RunConfig {
  label: string;
  engine: "sse" | "sme" | "master";
  probes: string[];
  tls: unknown;
  integrator: { t_final: number; seed: number };
}

export interface Manifest {
  name: string;
  figure: string;
  kind: "runs" | "landscape" | "spectrum_scan";
  runs: RunConfig[];
  landscape: { thetas: number[]; grid_n: number; J: number; N: number } | null;
  scan: { entries: { label: string }[] } | null;
  configHash: string;
}

export function readManifest(dir: string): Manifest {
  const raw = JSON.parse(readFileSync(join(dir, "manifest.json"), "utf8"));
  if (raw.schema !== SCHEMAS.manifest) {
    throw new SchemaError(`${dir}: manifest schema ${raw.schema}`);
  }
  const config = raw.config ?? {};
  return {
    name: String(raw.name ?? config.name ?? ""),
    figure: String(raw.figure ?? ""),
    kind: config.kind,
    runs: (config.runs ?? []).map((r: any) => ({
      label: String(r.label),
      engine: r.engine,
      probes: (r.probes ?? []).map(String),
      tls: r.tls ?? null,
      integrator: r.integrator ?? { t_final: 0, seed: 0 },
    })),
    landscape: config.landscape ?? null,
    scan: config.scan ?? null,
    configHash: String(raw.config_hash ?? ""),
  };
}
