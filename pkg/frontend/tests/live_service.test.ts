/** Drives the real UI controller against a live review service:
 * decisions, navigation back to decided candidates, and last-write-wins,
 * all observed end-to-end over HTTP. */

import { ChildProcess, spawn, spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationApp } from "../src/app.js";
import { buildElements, pressKey, until } from "./helpers.js";

// vitest runs with the package root as cwd; happy-dom rewrites
// import.meta.url to an http scheme, so resolve from cwd instead.
const HERE = join(process.cwd(), "tests");
const PYTHON = process.env.PYTHON ?? "python3";

const IDS = ["vid0:0:0:0", "vid0:0:1:100", "vid0:0:2:200"];

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port assigned"));
      }
    });
  });
}

describe("against a live review service", () => {
  let child: ChildProcess;
  let storeDir: string;
  let base: string;
  let api: ApiClient;

  beforeAll(async () => {
    storeDir = mkdtempSync(join(tmpdir(), "annotheia-ui-"));
    const seeded = spawnSync(
      PYTHON,
      [join(HERE, "helpers", "make_store.py"), storeDir],
      { encoding: "utf-8" },
    );
    if (!seeded.stdout.includes("seeded")) {
      throw new Error(`store seeding failed: ${seeded.stderr}`);
    }

    const port = await freePort();
    base = `http://127.0.0.1:${port}`;
    child = spawn(PYTHON, [
      "-m", "annotheia.cli", "serve",
      "--store", storeDir,
      "--port", String(port),
      "--media", join(storeDir, "media"),
    ], { stdio: ["ignore", "pipe", "pipe"] });

    api = new ApiClient(base);
    const deadline = Date.now() + 20_000;
    for (;;) {
      try {
        await api.listCandidates({ limit: 1 });
        break;
      } catch {
        if (Date.now() > deadline) throw new Error("service never came up");
        await new Promise((r) => setTimeout(r, 250));
      }
    }
  });

  afterAll(async () => {
    child?.kill("SIGTERM");
    await new Promise((r) => setTimeout(r, 300));
    child?.kill("SIGKILL");
    rmSync(storeDir, { recursive: true, force: true });
  });

  it("discard, navigate back, re-decide: the last decision wins", async () => {
    const els = buildElements();
    const app = new AnnotationApp(api, els, { annotator: "ui-e2e" });
    app.attach();
    await app.start();
    expect(app.current?.candidate_id).toBe(IDS[0]);

    // Discard the first candidate; the app auto-advances to the next pending.
    pressKey("d");
    await until(() => app.current?.candidate_id === IDS[1]);
    expect((await api.getCandidate(IDS[0])).status).toBe("discarded");

    // The discarded candidate stays reachable through prev.
    pressKey("ArrowLeft");
    await until(() => app.current?.candidate_id === IDS[0]);
    expect(els.statusLabel.textContent).toBe("discarded");

    // Re-decide with an edited transcript: accept must win (last write).
    els.transcript.value = "hola mundo corregido";
    els.transcript.dispatchEvent(new Event("input", { bubbles: true }));
    pressKey("a");
    await until(() => app.current?.candidate_id === IDS[1]);

    const revisited = await api.getCandidate(IDS[0]);
    expect(revisited.status).toBe("accepted");
    expect(revisited.edited_text).toBe("hola mundo corregido");

    // And the export shows the accepted row with the edited text.
    const response = await fetch(`${base}/api/export`);
    const rows = (await response.text())
      .split("\n")
      .filter(Boolean)
      .map((line) => JSON.parse(line) as { candidate_id: string; text: string });
    expect(rows.map((r) => r.candidate_id)).toEqual([IDS[0]]);
    expect(rows[0].text).toBe("hola mundo corregido");
  });

  it("transcript edits persist through PATCH without deciding", async () => {
    const els = buildElements();
    const app = new AnnotationApp(api, els, { annotator: "ui-e2e" });
    app.attach();
    await app.loadCandidate(IDS[2]);
    els.transcript.value = "solo un arreglo";
    els.transcript.dispatchEvent(new Event("input", { bubbles: true }));
    await app.saveTranscript();

    const fresh = await api.getCandidate(IDS[2]);
    expect(fresh.status).toBe("pending");
    expect(fresh.edited_text).toBe("solo un arreglo");
  });
});
