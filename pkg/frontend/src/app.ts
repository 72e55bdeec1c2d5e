/** The annotation cockpit controller: one candidate on screen at a time,
 * keyboard-first, with the active-speaker box overlaid on playback. */

import { ApiError, ReviewApi } from "./api.js";
import {
  DEFAULT_KEYMAP,
  Keymap,
  actionForKey,
  assertInjective,
  legendEntries,
} from "./keymap.js";
import { drawOverlay, frameIndexAt, syncCanvasToVideo } from "./overlay.js";
import { RetryQueue } from "./queue.js";
import type { Candidate, Neighbors } from "./types.js";

export interface AppElements {
  workspace: HTMLElement;
  doneScreen: HTMLElement;
  video: HTMLVideoElement;
  overlay: HTMLCanvasElement;
  transcript: HTMLTextAreaElement;
  candidateLabel: HTMLElement;
  statusLabel: HTMLElement;
  banner: HTMLElement;
  legend: HTMLElement;
  prevButton: HTMLButtonElement;
  nextButton: HTMLButtonElement;
  acceptButton: HTMLButtonElement;
  discardButton: HTMLButtonElement;
  saveButton: HTMLButtonElement;
  retryButton: HTMLButtonElement;
}

export interface AppOptions {
  annotator?: string;
  keymap?: Keymap;
  documentRef?: Document;
}

export class AnnotationApp {
  readonly keymap: Keymap;
  readonly retryQueue: RetryQueue;
  current: Candidate | null = null;
  neighbors: Neighbors = { prev: null, next: null };
  transcriptDirty = false;
  private annotator: string;
  private doc: Document;
  private rafHandle: number | null = null;

  constructor(
    private api: ReviewApi,
    private els: AppElements,
    options: AppOptions = {},
  ) {
    this.keymap = options.keymap ?? DEFAULT_KEYMAP;
    assertInjective(this.keymap);
    this.annotator = options.annotator ?? "anonymous";
    this.doc = options.documentRef ?? document;
    this.retryQueue = new RetryQueue((size) => this.renderBanner(size));
  }

  /** Wire DOM listeners; call once before start(). */
  attach(): void {
    this.doc.addEventListener("keydown", (e) => {
      void this.handleKeydown(e as KeyboardEvent);
    });
    this.els.transcript.addEventListener("input", () => {
      this.transcriptDirty = true;
    });
    this.els.video.addEventListener("timeupdate", () => this.renderOverlay());
    this.els.prevButton.addEventListener("click", () => void this.navigate("prev"));
    this.els.nextButton.addEventListener("click", () => void this.navigate("next"));
    this.els.acceptButton.addEventListener("click", () => void this.submit("accepted"));
    this.els.discardButton.addEventListener("click", () => void this.submit("discarded"));
    this.els.saveButton.addEventListener("click", () => void this.saveTranscript());
    this.els.retryButton.addEventListener("click", () => void this.retryPending());
    this.renderLegend();
    this.startOverlayLoop();
  }

  async start(): Promise<void> {
    try {
      await this.loadFirstPending();
    } catch (err) {
      this.showError(err);
    }
  }

  // -- loading ----------------------------------------------------------------

  async loadFirstPending(): Promise<void> {
    const page = await this.api.listCandidates({ status: "pending", limit: 1 });
    if (page.candidates.length === 0) {
      this.showDone();
      return;
    }
    await this.loadCandidate(page.candidates[0].candidate_id);
  }

  async loadCandidate(id: string): Promise<void> {
    const candidate = await this.api.getCandidate(id);
    const neighbors = await this.api.neighbors(id);
    // Everything fetched: mutate state and DOM in one synchronous block.
    this.current = candidate;
    this.neighbors = neighbors;
    this.els.workspace.hidden = false;
    this.els.doneScreen.hidden = true;
    this.els.video.src = candidate.media_url;
    this.els.transcript.value =
      candidate.edited_text ?? candidate.transcription.text;
    this.transcriptDirty = false;
    this.els.candidateLabel.textContent = candidate.candidate_id;
    this.els.statusLabel.textContent = candidate.status;
    this.els.prevButton.disabled = this.neighbors.prev === null;
    this.els.nextButton.disabled = this.neighbors.next === null;
    syncCanvasToVideo(this.els.overlay, this.els.video);
    this.renderOverlay();
  }

  showDone(): void {
    this.current = null;
    this.els.workspace.hidden = true;
    this.els.doneScreen.hidden = false;
    this.els.doneScreen.textContent = "All done - no pending candidates.";
  }

  private showError(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.els.banner.hidden = false;
    this.els.banner.querySelector(".banner-text")!.textContent =
      `Service error: ${message}`;
  }

  // -- keyboard -----------------------------------------------------------------

  private isTypingTarget(e: KeyboardEvent): boolean {
    const target = e.target as HTMLElement | null;
    if (!target) return false;
    return (
      target.tagName === "INPUT" ||
      target.tagName === "TEXTAREA" ||
      target.isContentEditable
    );
  }

  async handleKeydown(e: KeyboardEvent): Promise<void> {
    if (this.isTypingTarget(e)) {
      if (e.key === "Escape") (e.target as HTMLElement).blur();
      return;
    }
    const action = actionForKey(this.keymap, e.key);
    if (!action || !this.current) return;
    e.preventDefault();
    switch (action) {
      case "playPause":
        await this.togglePlayback();
        break;
      case "accept":
        await this.submit("accepted");
        break;
      case "discard":
        await this.submit("discarded");
        break;
      case "prev":
        await this.navigate("prev");
        break;
      case "next":
        await this.navigate("next");
        break;
      case "focusTranscript":
        this.els.transcript.focus();
        break;
    }
  }

  private async togglePlayback(): Promise<void> {
    const video = this.els.video;
    if (video.paused) {
      try {
        await video.play();
      } catch {
        // autoplay restrictions or no media: ignore
      }
    } else {
      video.pause();
    }
  }

  // -- mutations ----------------------------------------------------------------

  /** Accept/discard the current candidate with one POST (carrying the
   * dirty transcript, if any), then auto-advance to the next pending. */
  async submit(decision: "accepted" | "discarded"): Promise<void> {
    if (!this.current) return;
    const id = this.current.candidate_id;
    const body: Parameters<ReviewApi["postDecision"]>[1] = {
      decision,
      annotator: this.annotator,
    };
    if (this.transcriptDirty) body.edited_text = this.els.transcript.value;
    const run = async () => {
      await this.api.postDecision(id, body);
    };
    if (!(await this.tryMutation(`${decision} ${id}`, run))) return;
    this.transcriptDirty = false;
    try {
      await this.loadFirstPending();
    } catch (err) {
      this.showError(err);
    }
  }

  /** Persist the transcript without deciding. */
  async saveTranscript(): Promise<void> {
    if (!this.current) return;
    const id = this.current.candidate_id;
    const text = this.els.transcript.value;
    const done = await this.tryMutation(`save transcript ${id}`, async () => {
      await this.api.patchTranscript(id, {
        edited_text: text,
        annotator: this.annotator,
      });
    });
    if (done) this.transcriptDirty = false;
  }

  /** Move to a neighbor; decided candidates stay reachable for corrections. */
  async navigate(direction: "prev" | "next"): Promise<void> {
    const target = this.neighbors[direction];
    if (!target) return;
    try {
      await this.loadCandidate(target);
    } catch (err) {
      this.showError(err);
    }
  }

  async retryPending(): Promise<void> {
    const drained = await this.retryQueue.drain();
    if (drained && this.current === null) await this.start();
  }

  /** Run a mutation after draining earlier failures; on failure keep it
   * queued and show the banner. Returns true when it went through. */
  private async tryMutation(
    label: string,
    run: () => Promise<void>,
  ): Promise<boolean> {
    if (!(await this.retryQueue.drain())) {
      this.retryQueue.push({ label, run });
      return false;
    }
    try {
      await run();
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status !== null && err.status < 500) {
        this.showError(err); // a 4xx will never succeed on retry
        return false;
      }
      this.retryQueue.push({ label, run });
      return false;
    }
  }

  // -- rendering -----------------------------------------------------------------

  renderOverlay(): void {
    if (!this.current) return;
    const candidate = this.current;
    const nFrames = candidate.end_frame - candidate.start_frame;
    const index = frameIndexAt(this.els.video.currentTime, candidate.fps, nFrames);
    syncCanvasToVideo(this.els.overlay, this.els.video);
    const nativeWidth =
      candidate.frame_width ?? this.els.video.videoWidth ?? 0;
    const nativeHeight =
      candidate.frame_height ?? this.els.video.videoHeight ?? 0;
    if (index === null || nativeWidth <= 0 || nativeHeight <= 0) {
      drawOverlay(this.els.overlay, null, 1, 1);
      return;
    }
    drawOverlay(
      this.els.overlay,
      candidate.per_frame_bboxes[index],
      this.els.overlay.width / nativeWidth,
      this.els.overlay.height / nativeHeight,
    );
  }

  private startOverlayLoop(): void {
    const raf = (globalThis as { requestAnimationFrame?: typeof requestAnimationFrame })
      .requestAnimationFrame;
    if (!raf) return; // timeupdate events still refresh the overlay
    const tick = () => {
      this.renderOverlay();
      this.rafHandle = raf(tick);
    };
    this.rafHandle = raf(tick);
  }

  private renderLegend(): void {
    this.els.legend.innerHTML = "";
    for (const entry of legendEntries(this.keymap)) {
      const item = this.doc.createElement("li");
      const key = this.doc.createElement("kbd");
      key.textContent = entry.key;
      item.appendChild(key);
      item.appendChild(this.doc.createTextNode(` ${entry.label}`));
      this.els.legend.appendChild(item);
    }
  }

  private renderBanner(queued: number): void {
    if (queued > 0) {
      this.els.banner.hidden = false;
      this.els.banner.querySelector(".banner-text")!.textContent =
        `${queued} change${queued === 1 ? "" : "s"} waiting for the service`;
    } else {
      this.els.banner.hidden = true;
    }
  }
}
