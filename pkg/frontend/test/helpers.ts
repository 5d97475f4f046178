import { createHash } from "node:crypto";
import { mkdtempSync, readdirSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

export const REPORT_DIR = fileURLToPath(new URL("./fixtures/report", import.meta.url));

export function fx(name: string): string {
  return join(REPORT_DIR, name);
}

export function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "plotkit-"));
}

export function tempFile(content: string, name = "input.csv"): string {
  const path = join(tempDir(), name);
  writeFileSync(path, content, "utf-8");
  return path;
}

/** path -> sha256 for every file in the fixture report bundle. */
export function bundleDigests(): Map<string, string> {
  const digests = new Map<string, string>();
  for (const name of readdirSync(REPORT_DIR).sort()) {
    const digest = createHash("sha256").update(readFileSync(fx(name))).digest("hex");
    digests.set(name, digest);
  }
  return digests;
}

export function countMatches(text: string, pattern: RegExp): number {
  return (text.match(new RegExp(pattern.source, pattern.flags + "g")) ?? []).length;
}
