/** Pure overlay math plus the canvas drawing for the active-speaker box. */

import type { BoundingBox } from "./types.js";

/**
 * Frame index for a playback time: floor(t * fps) clamped to
 * [0, nFrames - 1] while inside the clip, null outside it.
 */
export function frameIndexAt(
  time: number,
  fps: number,
  nFrames: number,
): number | null {
  if (!Number.isFinite(time) || time < 0 || nFrames <= 0) return null;
  const index = Math.floor(time * fps);
  if (index >= nFrames) return null; // past the clip end: no box
  return Math.min(Math.max(index, 0), nFrames - 1);
}

/** Scale a source-pixel box into display coordinates. */
export function scaleBox(
  box: BoundingBox,
  scaleX: number,
  scaleY: number,
): BoundingBox {
  return [box[0] * scaleX, box[1] * scaleY, box[2] * scaleX, box[3] * scaleY];
}

/** Match the canvas backing store to the video's displayed size. */
export function syncCanvasToVideo(
  canvas: HTMLCanvasElement,
  video: HTMLVideoElement,
): void {
  const width = video.clientWidth || video.videoWidth;
  const height = video.clientHeight || video.videoHeight;
  if (width > 0 && height > 0) {
    if (canvas.width !== width) canvas.width = width;
    if (canvas.height !== height) canvas.height = height;
  }
}

/** Draw the green active-speaker rectangle; box = null clears only. */
export function drawOverlay(
  canvas: HTMLCanvasElement,
  box: BoundingBox | null,
  scaleX: number,
  scaleY: number,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!box) return;
  const [x1, y1, x2, y2] = scaleBox(box, scaleX, scaleY);
  ctx.strokeStyle = "#22c55e";
  ctx.lineWidth = 2;
  ctx.strokeRect(x1, y1, x2 - x1, y2 - y1);
}
