#!/usr/bin/env node
/**
 * figures <preset-dir> [--format png|svg]
 *
 * Renders every panel of a simulator preset output directory next to its
 * data. Exit codes: 0 ok, 1 render failure, 2 usage or schema mismatch.
 */

import { SchemaError } from "./csv";
import { ImageFormat, renderPresetDir } from "./render";

function run(argv: string[]): number {
  const args = argv.slice(2);
  let dir: string | null = null;
  let format: ImageFormat = "svg";
  for (let i = 0; i < args.length; i += 1) {
    if (args[i] === "--format") {
      const value = args[i + 1];
      if (value !== "svg" && value !== "png") {
        console.error(`unknown format ${value}; use svg or png`);
        return 2;
      }
      format = value;
      i += 1;
    } else if (!dir) {
      dir = args[i];
    } else {
      console.error(`unexpected argument ${args[i]}`);
      return 2;
    }
  }
  if (!dir) {
    console.error("usage: figures <preset-dir> [--format png|svg]");
    return 2;
  }
  try {
    const files = renderPresetDir(dir, format);
    for (const f of files) console.log(f);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${(err as Error).message}`);
      return 2;
    }
    console.error(`render failed: ${(err as Error).message}`);
    return 1;
  }
}

process.exitCode = run(process.argv);
