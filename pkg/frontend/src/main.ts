import { ApiClient } from "./api.js";
import { AnnotationApp, AppElements } from "./app.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const elements: AppElements = {
  workspace: el("workspace"),
  doneScreen: el("done-screen"),
  video: el<HTMLVideoElement>("player"),
  overlay: el<HTMLCanvasElement>("overlay"),
  transcript: el<HTMLTextAreaElement>("transcript"),
  candidateLabel: el("candidate-label"),
  statusLabel: el("status-label"),
  banner: el("banner"),
  legend: el("legend"),
  prevButton: el<HTMLButtonElement>("prev"),
  nextButton: el<HTMLButtonElement>("next"),
  acceptButton: el<HTMLButtonElement>("accept"),
  discardButton: el<HTMLButtonElement>("discard"),
  saveButton: el<HTMLButtonElement>("save"),
  retryButton: el<HTMLButtonElement>("retry"),
};

const params = new URLSearchParams(window.location.search);
const app = new AnnotationApp(new ApiClient(""), elements, {
  annotator: params.get("annotator") ?? "anonymous",
});
app.attach();
void app.start();
