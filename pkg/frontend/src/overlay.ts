/** Canvas drawing for the annotation overlay (runs in element pixels; the
 * canvas is kept the same size as the video element's rect). */
import type { Box } from "./types.js";
import { videoToClient, type ElementRect } from "./coords.js";

export interface TrailPoint {
  x: number;
  y: number;
}

export function drawTrail(
  ctx: CanvasRenderingContext2D,
  points: TrailPoint[],
  rect: ElementRect,
  videoWidth: number,
  videoHeight: number,
  color = "#00e5ff",
): void {
  if (points.length === 0) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  points.forEach((p, i) => {
    const c = videoToClient(p.x, p.y, rect, videoWidth, videoHeight);
    const x = c.clientX - rect.left;
    const y = c.clientY - rect.top;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
  const last = points[points.length - 1];
  const c = videoToClient(last.x, last.y, rect, videoWidth, videoHeight);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(c.clientX - rect.left, c.clientY - rect.top, 4, 0, 2 * Math.PI);
  ctx.fill();
}

export function drawBox(
  ctx: CanvasRenderingContext2D,
  box: Box,
  rect: ElementRect,
  videoWidth: number,
  videoHeight: number,
  color = "#ffd000",
  dashed = false,
): void {
  const a = videoToClient(box[0], box[1], rect, videoWidth, videoHeight);
  const b = videoToClient(box[2], box[3], rect, videoWidth, videoHeight);
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.setLineDash(dashed ? [6, 4] : []);
  ctx.strokeRect(
    a.clientX - rect.left,
    a.clientY - rect.top,
    b.clientX - a.clientX,
    b.clientY - a.clientY,
  );
  ctx.setLineDash([]);
}

export function drawTimeline(
  ctx: CanvasRenderingContext2D,
  keyframeTimes: number[],
  duration: number,
  width: number,
  height: number,
  playhead: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#333";
  ctx.fillRect(0, height / 2 - 1, width, 2);
  ctx.fillStyle = "#ffd000";
  for (const t of keyframeTimes) {
    const x = (t / duration) * width;
    ctx.fillRect(x - 2, 2, 4, height - 4);
  }
  ctx.fillStyle = "#00e5ff";
  const px = (playhead / duration) * width;
  ctx.fillRect(px - 1, 0, 2, height);
}
