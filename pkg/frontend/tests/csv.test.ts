import { describe, expect, it } from "vitest";
import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { SCHEMAS, SchemaError, column, readCsv, readManifest } from "../src/csv";

const FIXTURES = join(__dirname, "fixtures");

describe("csv reader", () => {
  it("loads a trajectory file with metadata comments", () => {
    const table = readCsv(
      join(FIXTURES, "fig7a_mini", "panela_traj000.csv"),
      SCHEMAS.trajectory,
    );
    expect(table.header[0]).toBe("t");
    expect(table.comments.channels).toContain("asym1-2-3");
    const t = column(table, "t");
    expect(t[0]).toBe(0);
    expect(t.length).toBe(table.rows.length);
    expect(column(table, "J_tot").length).toBe(t.length);
  });

  it("rejects a mismatched schema version", () => {
    const dir = mkdtempSync(join(tmpdir(), "figtest-"));
    const path = join(dir, "bad.csv");
    writeFileSync(path, "# schema=ringmon.trajectory.v999\nt\n0\n");
    expect(() => readCsv(path, SCHEMAS.trajectory)).toThrow(SchemaError);
  });

  it("rejects a missing schema line", () => {
    const dir = mkdtempSync(join(tmpdir(), "figtest-"));
    const path = join(dir, "none.csv");
    writeFileSync(path, "t,x\n0,1\n");
    expect(() => readCsv(path, SCHEMAS.trajectory)).toThrow(SchemaError);
  });

  it("reads manifests and run configs", () => {
    const manifest = readManifest(join(FIXTURES, "fig10_mini"));
    expect(manifest.kind).toBe("runs");
    expect(manifest.runs.map((r) => r.engine)).toEqual(
      ["master", "master", "master"],
    );
    expect(manifest.configHash).toMatch(/^[0-9a-f]{64}$/);
  });
});
