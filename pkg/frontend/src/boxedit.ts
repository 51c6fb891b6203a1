/** Two-corner keyframe editing with interpolation preview.
 *
 * Corners can arrive in any order; they are normalized to min/max. The
 * preview between keyframes uses the same rule the server applies when it
 * interpolates a track: linear inside a segment, held beyond the first or
 * last keyframe of that segment, absent outside every segment.
 */
import type { SessionClient } from "./client.js";
import type { MediaClock, WallClock } from "./capture.js";
import type { Box, Keyframe, Segment } from "./types.js";
import type { VideoPoint } from "./coords.js";

export function normalizeCorners(a: VideoPoint, b: VideoPoint): Box | null {
  if (a.x === b.x || a.y === b.y) {
    return null; // box must have area
  }
  return [Math.min(a.x, b.x), Math.min(a.y, b.y), Math.max(a.x, b.x), Math.max(a.y, b.y)];
}

export function interpolateBox(keyframes: Keyframe[], segments: Segment[], t: number): Box | null {
  const segment = segments.find((s) => s.startT <= t && t <= s.endT);
  if (!segment) return null;
  const inSegment = keyframes
    .filter((k) => segment.startT <= k.mediaT && k.mediaT <= segment.endT)
    .sort((a, b) => a.mediaT - b.mediaT);
  if (inSegment.length === 0) return null;
  let before: Keyframe | null = null;
  let after: Keyframe | null = null;
  for (const k of inSegment) {
    if (k.mediaT <= t) before = k;
    if (k.mediaT >= t && after === null) after = k;
  }
  if (!before) return after!.box;
  if (!after) return before.box;
  if (after.mediaT === before.mediaT) return before.box;
  const w = (t - before.mediaT) / (after.mediaT - before.mediaT);
  return before.box.map((a, i) => a + w * (after!.box[i] - a)) as unknown as Box;
}

export interface BoxEditorOptions {
  client: SessionClient;
  media: MediaClock;
  wall: WallClock;
  onError?(message: string): void;
  onChange?(): void;
}

export class BoxEditor {
  private pendingCorner: VideoPoint | null = null;
  keyframes: Keyframe[] = [];
  segments: Segment[] = [];

  constructor(private opts: BoxEditorOptions) {}

  get pending(): VideoPoint | null {
    return this.pendingCorner;
  }

  /** Register a corner click; the second click completes a keyframe at the
   * current (paused) media time. A zero-area pair is rejected and the first
   * corner stays pending. */
  cornerClick(p: VideoPoint): Box | null {
    if (!this.pendingCorner) {
      this.pendingCorner = p;
      return null;
    }
    const box = normalizeCorners(this.pendingCorner, p);
    if (!box) {
      this.opts.onError?.("box must have area; second corner rejected");
      return null;
    }
    this.pendingCorner = null;
    this.setKeyframe(box);
    return box;
  }

  cancelPendingCorner(): void {
    this.pendingCorner = null;
  }

  setKeyframe(box: Box): void {
    const mediaT = this.opts.media.currentTime;
    this.opts.client.send({
      wall_t: this.opts.wall.now(),
      kind: "set_keyframe",
      box,
      media_t: mediaT,
    });
    this.applyUpsert(mediaT, box);
    this.opts.onChange?.();
  }

  deleteKeyframe(mediaT: number): void {
    if (!this.keyframes.some((k) => k.mediaT === mediaT)) {
      this.opts.onError?.(`no keyframe at ${mediaT}`);
      return;
    }
    this.opts.client.send({ wall_t: this.opts.wall.now(), kind: "delete_keyframe", t: mediaT });
    this.keyframes = this.keyframes.filter((k) => k.mediaT !== mediaT);
    this.opts.onChange?.();
  }

  /** Roll back one optimistic edit the server refused. */
  rollback(event: { kind: string; box?: Box; media_t?: number; t?: number }): void {
    if (event.kind === "set_keyframe" && event.media_t !== undefined) {
      this.keyframes = this.keyframes.filter((k) => k.mediaT !== event.media_t);
    } else if (event.kind === "delete_keyframe" && event.t !== undefined && event.box) {
      this.applyUpsert(event.t, event.box);
    }
    this.opts.onChange?.();
  }

  previewAt(t: number): Box | null {
    return interpolateBox(this.keyframes, this.segments, t);
  }

  private applyUpsert(mediaT: number, box: Box): void {
    this.keyframes = this.keyframes.filter((k) => k.mediaT !== mediaT);
    this.keyframes.push({ mediaT, box });
    this.keyframes.sort((a, b) => a.mediaT - b.mediaT);
  }
}
