#!/usr/bin/env node
/**
 * decluster-figures render --kind <trajectories|entropy|phase-grid>
 *                          --in <csv> --out <svg> [--no-highlight]
 *
 * Exit codes: 0 success, 2 validation error.
 */

import { render, PlotKind } from "./render";
import { SchemaError } from "./csv";

export function runCli(argv: string[]): number {
  try {
    if (argv[0] !== "render") {
      throw new SchemaError(`unknown command ${JSON.stringify(argv[0])}; expected "render"`);
    }
    let kind: string | undefined;
    let input: string | undefined;
    let output: string | undefined;
    let highlight = true;
    for (let i = 1; i < argv.length; i++) {
      const arg = argv[i];
      if (arg === "--kind") kind = argv[++i];
      else if (arg === "--in") input = argv[++i];
      else if (arg === "--out") output = argv[++i];
      else if (arg === "--no-highlight") highlight = false;
      else throw new SchemaError(`unknown argument ${arg}`);
    }
    if (!kind || !input || !output) {
      throw new SchemaError("render requires --kind, --in and --out");
    }
    if (!["trajectories", "entropy", "phase-grid"].includes(kind)) {
      throw new SchemaError(`unknown figure kind: ${kind}`);
    }
    const written = render({
      kind: kind as PlotKind,
      input,
      output,
      highlightControlled: highlight,
    });
    console.log(written);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(runCli(process.argv.slice(2)));
}
