import { beforeEach, describe, expect, it } from "vitest";

import { ApiError, ReviewApi } from "../src/api.js";
import { AnnotationApp } from "../src/app.js";
import type { Candidate, CandidateStatus } from "../src/types.js";
import { buildElements, makeCandidate, pressKey, until } from "./helpers.js";

class FakeApi implements ReviewApi {
  candidates: Candidate[];
  statuses = new Map<string, CandidateStatus>();
  decisionCalls: { id: string; body: Record<string, unknown> }[] = [];
  transcriptCalls: { id: string; body: Record<string, unknown> }[] = [];
  failDecisions: Error | null = null;

  constructor(candidates: Candidate[]) {
    this.candidates = candidates;
    for (const c of candidates) this.statuses.set(c.candidate_id, c.status);
  }

  private sorted(): Candidate[] {
    return [...this.candidates].sort((a, b) =>
      a.candidate_id < b.candidate_id ? -1 : 1,
    );
  }

  async listCandidates(params: { status?: CandidateStatus; limit?: number } = {}) {
    let rows = this.sorted();
    if (params.status) {
      rows = rows.filter((c) => this.statuses.get(c.candidate_id) === params.status);
    }
    return { candidates: rows.slice(0, params.limit ?? 50), next_cursor: null };
  }

  async getCandidate(id: string) {
    const found = this.candidates.find((c) => c.candidate_id === id);
    if (!found) throw new ApiError(`unknown candidate ${id}`, 404);
    return { ...found, status: this.statuses.get(id)! };
  }

  async neighbors(id: string) {
    const ids = this.sorted().map((c) => c.candidate_id);
    const index = ids.indexOf(id);
    return {
      prev: index > 0 ? ids[index - 1] : null,
      next: index + 1 < ids.length ? ids[index + 1] : null,
    };
  }

  async postDecision(id: string, body: { decision: "accepted" | "discarded" }) {
    if (this.failDecisions) throw this.failDecisions;
    this.decisionCalls.push({ id, body: { ...body } });
    this.statuses.set(id, body.decision);
    return { candidate_id: id, status: body.decision };
  }

  async patchTranscript(id: string, body: { edited_text: string; annotator: string }) {
    this.transcriptCalls.push({ id, body: { ...body } });
    return { candidate_id: id, edited_text: body.edited_text };
  }
}

function makeApp(api: ReviewApi) {
  const els = buildElements();
  const app = new AnnotationApp(api, els, { annotator: "tester" });
  app.attach();
  return { app, els };
}

describe("AnnotationApp", () => {
  let api: FakeApi;

  beforeEach(() => {
    api = new FakeApi([makeCandidate("c:0"), makeCandidate("c:1"), makeCandidate("c:2")]);
  });

  it("loads the first pending candidate and populates the transcript", async () => {
    const { app, els } = makeApp(api);
    await app.start();
    expect(app.current?.candidate_id).toBe("c:0");
    expect(els.transcript.value).toBe("hola mundo");
    expect(els.video.src).toContain("/api/media/c:0.mp4");
    expect(els.prevButton.disabled).toBe(true);
    expect(els.nextButton.disabled).toBe(false);
    expect(els.legend.querySelectorAll("li")).toHaveLength(6);
  });

  it("shows the done screen when nothing is pending", async () => {
    for (const c of api.candidates) api.statuses.set(c.candidate_id, "accepted");
    const { app, els } = makeApp(api);
    await app.start();
    expect(els.doneScreen.hidden).toBe(false);
    expect(els.workspace.hidden).toBe(true);
  });

  it('keyboard "a" sends exactly one POST with the dirty transcript and advances', async () => {
    const { app, els } = makeApp(api);
    await app.start();

    els.transcript.value = "hola mundo editado";
    els.transcript.dispatchEvent(new Event("input", { bubbles: true }));

    pressKey("a");
    await until(() => app.current?.candidate_id === "c:1");

    expect(api.decisionCalls).toHaveLength(1);
    expect(api.decisionCalls[0]).toEqual({
      id: "c:0",
      body: {
        decision: "accepted",
        annotator: "tester",
        edited_text: "hola mundo editado",
      },
    });
  });

  it("an untouched transcript is not sent with the decision", async () => {
    const { app } = makeApp(api);
    await app.start();
    pressKey("d");
    await until(() => api.decisionCalls.length === 1);
    expect(api.decisionCalls[0].body).not.toHaveProperty("edited_text");
    expect(api.decisionCalls[0].body.decision).toBe("discarded");
  });

  it("typing in the transcript never triggers shortcuts", async () => {
    const { app, els } = makeApp(api);
    await app.start();
    pressKey("a", els.transcript);
    pressKey("d", els.transcript);
    await new Promise((r) => setTimeout(r, 30));
    expect(api.decisionCalls).toHaveLength(0);
    expect(app.current?.candidate_id).toBe("c:0");
  });

  it('"e" focuses the transcript box', async () => {
    const { app, els } = makeApp(api);
    await app.start();
    pressKey("e");
    await until(() => document.activeElement === els.transcript);
  });

  it("navigates with arrow keys, including to decided candidates", async () => {
    const { app } = makeApp(api);
    await app.start();
    pressKey("ArrowRight");
    await until(() => app.current?.candidate_id === "c:1");
    pressKey("ArrowLeft");
    await until(() => app.current?.candidate_id === "c:0");
    pressKey("ArrowLeft"); // prev of the first candidate: stays put
    await new Promise((r) => setTimeout(r, 30));
    expect(app.current?.candidate_id).toBe("c:0");
  });

  it("save transcript PATCHes without deciding", async () => {
    const { app, els } = makeApp(api);
    await app.start();
    els.transcript.value = "corregido";
    els.transcript.dispatchEvent(new Event("input", { bubbles: true }));
    await app.saveTranscript();
    expect(api.transcriptCalls).toEqual([
      { id: "c:0", body: { edited_text: "corregido", annotator: "tester" } },
    ]);
    expect(api.decisionCalls).toHaveLength(0);
    expect(app.current?.candidate_id).toBe("c:0");
  });

  it("queues failed decisions, shows the banner, retries later", async () => {
    const { app, els } = makeApp(api);
    await app.start();

    api.failDecisions = new ApiError("service unreachable");
    pressKey("a");
    await until(() => app.retryQueue.size === 1);
    expect(els.banner.hidden).toBe(false);
    expect(els.banner.textContent).toContain("1 change");
    expect(api.decisionCalls).toHaveLength(0);

    api.failDecisions = null;
    els.retryButton.click();
    await until(() => app.retryQueue.size === 0);
    expect(api.decisionCalls).toHaveLength(1);
    expect(els.banner.hidden).toBe(true);
  });

  it("renders the overlay box only inside the clip", async () => {
    const { app, els } = makeApp(api);
    await app.start();
    els.overlay.width = 128; // 2x the native 64-pixel width
    els.overlay.height = 96;
    const calls: unknown[][] = [];
    const ctx = {
      clearRect: () => {},
      strokeRect: (...args: unknown[]) => calls.push(args),
      strokeStyle: "",
      lineWidth: 0,
    };
    (els.overlay as unknown as { getContext: () => unknown }).getContext =
      () => ctx;

    Object.defineProperty(els.video, "currentTime", { value: 0, configurable: true });
    app.renderOverlay();
    expect(calls).toHaveLength(1);
    expect(calls[0]).toEqual([40, 20, 48, 56]); // (20,10)-(44,38) at 2x

    calls.length = 0;
    Object.defineProperty(els.video, "currentTime", { value: 99, configurable: true });
    app.renderOverlay();
    expect(calls).toHaveLength(0); // past the clip: no box
  });
});
