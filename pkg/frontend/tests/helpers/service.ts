/** Spawn the real labeling service + synthesize a dataset for tests. */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface LiveService {
  baseUrl: string;
  datasetDir: string;
  gold: Record<string, string>;
  stop: () => void;
}

export function makeDataset(dir: string, entities = 60, seed = 19): void {
  execFileSync(
    "graphrepair",
    [
      "synth",
      "--out", dir,
      "--entities", String(entities),
      "--sources", "3",
      "--duplicate-ratio", "0.4",
      "--corruption", "0.2",
      "--seed", String(seed),
    ],
    { stdio: "pipe" },
  );
}

export function readGold(path: string): Record<string, string> {
  const gold: Record<string, string> = {};
  const lines = readFileSync(path, "utf-8").trim().split("\n").slice(1);
  for (const line of lines) {
    const [rid, entity] = line.split(",");
    gold[rid] = entity;
  }
  return gold;
}

async function waitForReady(baseUrl: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 60000;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`service exited early with code ${child.exitCode}`);
    }
    try {
      const response = await fetch(`${baseUrl}/sessions/__probe__/status`);
      if (response.status === 404) return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`service did not come up: ${lastError}`);
}

export async function startService(): Promise<LiveService> {
  const datasetDir = mkdtempSync(join(tmpdir(), "graphrepair-ui-data-"));
  makeDataset(datasetDir);
  const stateDir = mkdtempSync(join(tmpdir(), "graphrepair-ui-state-"));
  const port = 18000 + Math.floor(Math.random() * 2000);
  const baseUrl = `http://127.0.0.1:${port}`;
  const child = spawn(
    "graphrepair",
    ["serve", "--state-dir", stateDir, "--port", String(port)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  child.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });
  try {
    await waitForReady(baseUrl, child);
  } catch (error) {
    child.kill();
    throw new Error(`${error}\nservice stderr:\n${stderr}`);
  }
  return {
    baseUrl,
    datasetDir,
    gold: readGold(join(datasetDir, "gold.csv")),
    stop: () => child.kill(),
  };
}

export async function until<T>(
  probe: () => T | Promise<T>,
  predicate: (value: T) => boolean,
  timeoutMs = 60000,
  stepMs = 100,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  let last: T;
  do {
    last = await probe();
    if (predicate(last)) return last;
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  } while (Date.now() < deadline);
  throw new Error(`condition not reached in ${timeoutMs}ms; last: ${JSON.stringify(last!)}`);
}
