import { describe, expect, it } from "vitest";
import { cpSync, mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { SCHEMAS, readCsv } from "../src/csv";
import { landscapeGrid, renderPanels, renderPresetDir } from "../src/render";

const FIXTURES = join(__dirname, "fixtures");

function scratchCopy(name: string): string {
  const dir = mkdtempSync(join(tmpdir(), "figrender-"));
  cpSync(join(FIXTURES, name), dir, { recursive: true });
  return dir;
}

describe("panel rendering", () => {
  it("renders one panel per trajectory run", () => {
    const panels = renderPanels(join(FIXTURES, "fig6_mini"));
    expect(panels.map((p) => p.filename)).toEqual([
      "ratio5_sigma_z", "ratio2_sigma_z", "ratio1_sigma_z",
      "ratio0.5_sigma_z",
    ]);
    for (const panel of panels) {
      expect(panel.svg).toContain("<svg");
      expect(panel.svg).toContain("1/γ"); // TLS time axis
      expect(panel.svg).toContain("polyline");
    }
  });

  it("overlays all trajectories of an ensemble run in one panel", () => {
    const panels = renderPanels(join(FIXTURES, "fig7a_mini"));
    expect(panels).toHaveLength(1);
    const lines = panels[0].svg.match(/<polyline/g) ?? [];
    expect(lines.length).toBe(2); // two trajectories
    expect(panels[0].svg).toContain("1/J");
  });

  it("combines master runs into a single purity panel", () => {
    const panels = renderPanels(join(FIXTURES, "fig10_mini"));
    expect(panels).toHaveLength(1);
    expect(panels[0].filename).toBe("purity");
    const lines = panels[0].svg.match(/<polyline/g) ?? [];
    expect(lines.length).toBe(3);
  });

  it("renders SME runs and spectrum scans", () => {
    expect(renderPanels(join(FIXTURES, "sme_mini"))).toHaveLength(2);
    const scan = renderPanels(join(FIXTURES, "scan_mini"));
    expect(scan[0].filename).toBe("spectrum_L3N1");
    expect(scan[0].svg).toContain("circle");
  });

  it("locates the landscape minima at the two stated wells", () => {
    const table = readCsv(join(FIXTURES, "land_mini", "landscape.csv"),
                          SCHEMAS.landscape);
    const grid = landscapeGrid(table);
    const cell = grid.coords[1] - grid.coords[0];
    const expected = [
      [(2 * Math.PI) / 3, (2 * Math.PI) / 3],
      [(4 * Math.PI) / 3, (4 * Math.PI) / 3],
    ];
    expect(grid.minima).toHaveLength(2);
    for (const [x, y] of expected) {
      const hit = grid.minima.some(
        (m) => Math.abs(m.x - x) <= cell && Math.abs(m.y - y) <= cell,
      );
      expect(hit).toBe(true);
    }
  });

  it("renders the landscape heatmap with minimum markers", () => {
    const panels = renderPanels(join(FIXTURES, "land_mini"));
    expect(panels.map((p) => p.filename)).toEqual(
      ["landscape", "landscape_cuts"],
    );
    const markers = panels[0].svg.match(/stroke="#ffffff"/g) ?? [];
    expect(markers.length).toBe(2);
  });

  it("writes byte-identical output on re-render", () => {
    const dir = scratchCopy("fig7a_mini");
    const first = renderPresetDir(dir, "svg");
    const before = first.map((f) => readFileSync(f));
    const second = renderPresetDir(dir, "svg");
    expect(second).toEqual(first);
    second.forEach((f, i) => {
      expect(readFileSync(f).equals(before[i])).toBe(true);
    });
  });

  it("exports PNG panels with a valid signature", () => {
    const dir = scratchCopy("land_mini");
    const files = renderPresetDir(dir, "png");
    expect(files.every((f) => f.endsWith(".png"))).toBe(true);
    const magic = readFileSync(files[0]).subarray(0, 8);
    expect([...magic]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a,
                                0x0a]);
  });

  it("fails cleanly on a directory without a manifest", () => {
    const dir = mkdtempSync(join(tmpdir(), "figrender-"));
    expect(() => renderPresetDir(dir)).toThrow();
  });
});
