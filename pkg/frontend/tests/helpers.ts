import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import type { RunConfig } from "../src/config.js";
import type { ArrayView } from "../src/format.js";

export const PYTHON = process.env.PYTHON ?? "python3";

export interface RunningService {
  proc: ChildProcess;
  url: string;
}

/** Spawn the Python service on a random port and wait for /health. */
export async function startService(): Promise<RunningService> {
  const port = 20000 + Math.floor(Math.random() * 20000);
  const proc = spawn(
    PYTHON,
    ["-m", "stgridpool.cli", "serve", "--port", String(port)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (chunk) => (stderr += String(chunk)));

  const url = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 60_000;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) break;
    try {
      const response = await fetch(`${url}/health`);
      if (response.ok) return { proc, url };
    } catch {
      // not listening yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  proc.kill();
  throw new Error(`service did not come up on ${url}\n${stderr}`);
}

export function stopService(service: RunningService): void {
  service.proc.kill();
}

export function configFileText(config: RunConfig): string {
  return (
    Object.entries(config)
      .map(([key, value]) => `${key} = ${value}`)
      .join("\n") + "\n"
  );
}

/** Run `stgp pool` on STGP bytes via temp files; returns the output bytes. */
export function poolViaCli(tensorBytes: Uint8Array, config: RunConfig): Uint8Array {
  const dir = mkdtempSync(join(tmpdir(), "stgp-"));
  const inPath = join(dir, "in.stgp");
  const outPath = join(dir, "out.stgp");
  const cfgPath = join(dir, "run.cfg");
  writeFileSync(inPath, tensorBytes);
  writeFileSync(cfgPath, configFileText(config));
  const proc = spawnSync(
    PYTHON,
    ["-m", "stgridpool.cli", "pool", inPath, outPath, "--config", cfgPath],
    { encoding: "utf-8" },
  );
  if (proc.status !== 0) {
    throw new Error(`stgp pool failed: ${proc.stderr}`);
  }
  return new Uint8Array(readFileSync(outPath));
}

/** Deterministic PRNG (mulberry32) so failures reproduce. */
export function makeRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randomTensor(
  rng: () => number,
  shape: number[],
): ArrayView {
  const size = shape.reduce((a, b) => a * b, 1);
  const data = new Float32Array(size);
  for (let i = 0; i < size; i++) {
    // Box-Muller; float32 rounding happens on store
    const u = Math.max(rng(), 1e-12);
    const v = rng();
    data[i] = Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
  return { shape: [...shape], data };
}

export function randomInt(rng: () => number, lo: number, hi: number): number {
  return lo + Math.floor(rng() * (hi - lo + 1));
}
