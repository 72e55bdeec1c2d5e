import type { AppElements } from "../src/app.js";
import type { Candidate } from "../src/types.js";

export function buildElements(): AppElements {
  document.body.innerHTML = `
    <div id="banner" hidden><span class="banner-text"></span>
      <button id="retry"></button></div>
    <div id="done-screen" hidden></div>
    <div id="workspace" hidden>
      <video id="player"></video>
      <canvas id="overlay"></canvas>
      <textarea id="transcript"></textarea>
      <span id="candidate-label"></span>
      <span id="status-label"></span>
      <ul id="legend"></ul>
      <button id="prev"></button><button id="next"></button>
      <button id="accept"></button><button id="discard"></button>
      <button id="save"></button>
    </div>`;
  const el = (id: string) => document.getElementById(id)!;
  return {
    workspace: el("workspace"),
    doneScreen: el("done-screen"),
    video: el("player") as HTMLVideoElement,
    overlay: el("overlay") as HTMLCanvasElement,
    transcript: el("transcript") as HTMLTextAreaElement,
    candidateLabel: el("candidate-label"),
    statusLabel: el("status-label"),
    banner: el("banner"),
    legend: el("legend"),
    prevButton: el("prev") as HTMLButtonElement,
    nextButton: el("next") as HTMLButtonElement,
    acceptButton: el("accept") as HTMLButtonElement,
    discardButton: el("discard") as HTMLButtonElement,
    saveButton: el("save") as HTMLButtonElement,
    retryButton: el("retry") as HTMLButtonElement,
  };
}

export function makeCandidate(
  id: string,
  overrides: Partial<Candidate> = {},
): Candidate {
  return {
    candidate_id: id,
    video_id: "vid0",
    scene_index: 0,
    track_id: 0,
    start_frame: 0,
    end_frame: 74,
    per_frame_bboxes: Array.from({ length: 74 }, () => [20, 10, 44, 38]),
    transcription: {
      text: "hola mundo",
      language: "auto-detected:es",
      words: [
        { word: "hola", t0: 0.1, t1: 0.48 },
        { word: "mundo", t0: 0.55, t1: 1.02 },
      ],
    },
    status: "pending",
    edited_text: null,
    transcription_failed: false,
    fps: 25,
    frame_width: 64,
    frame_height: 48,
    start_seconds: 0,
    end_seconds: 2.96,
    media_url: `/api/media/${id}.mp4`,
    ...overrides,
  };
}

/** Let queued promise callbacks and timers run. */
export async function tick(ms = 0): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, ms));
}

export async function until(
  condition: () => boolean,
  timeoutMs = 10_000,
): Promise<void> {
  const start = Date.now();
  while (!condition()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error("condition not reached in time");
    }
    await tick(20);
  }
}

export function pressKey(key: string, target: EventTarget = document): void {
  target.dispatchEvent(
    new KeyboardEvent("keydown", { key, bubbles: true, cancelable: true }),
  );
}
