/** Pointer-tracking capture for live point annotation.
 *
 * The loop runs at display refresh while an annotation is held, downsamples
 * to at most `maxHz` cursor events, maps the pointer from screen to source
 * video pixels against the element's current rect, and stamps every event
 * with the video element's own media time. Leaving the video area stops
 * the annotation immediately (conservative: better a clean stop than false
 * positives from an untracked pointer).
 */
import type { SessionClient } from "./client.js";
import { clientToVideo, insideVideo, type ElementRect } from "./coords.js";

export interface WallClock {
  /** Seconds, session-relative. */
  now(): number;
}

export interface MediaClock {
  readonly currentTime: number;
}

export interface PointerState {
  clientX: number;
  clientY: number;
}

export interface PointerSource {
  /** Current pointer, or null when it is unavailable / off the page. */
  read(): PointerState | null;
}

export interface CaptureOptions {
  client: SessionClient;
  media: MediaClock;
  wall: WallClock;
  pointer: PointerSource;
  getRect(): ElementRect;
  videoWidth: number;
  videoHeight: number;
  maxHz?: number;
  onAutoStop?(reason: string): void;
}

const DEFAULT_MAX_HZ = 60;

export class OtfCaptureLoop {
  private lastSentWall = -Infinity;
  private lastSentMedia = -Infinity;
  private _active = false;

  constructor(private opts: CaptureOptions) {}

  get active(): boolean {
    return this._active;
  }

  /** Open the annotation (pointer pressed / toggle on). */
  begin(): void {
    if (this._active) return;
    this._active = true;
    this.lastSentWall = -Infinity;
    this.lastSentMedia = -Infinity;
    this.opts.client.send({
      wall_t: this.opts.wall.now(),
      kind: "begin_annotation",
      media_t: this.opts.media.currentTime,
    });
  }

  /** Close the annotation (pointer released / toggle off). */
  stop(): void {
    if (!this._active) return;
    this._active = false;
    this.opts.client.send({
      wall_t: this.opts.wall.now(),
      kind: "stop_annotation",
      media_t: this.opts.media.currentTime,
    });
  }

  /** Call once per display frame while a session is live. */
  tick(): void {
    if (!this._active) return;
    const pointer = this.opts.pointer.read();
    const rect = this.opts.getRect();
    const mapped = pointer
      ? clientToVideo(pointer.clientX, pointer.clientY, rect, this.opts.videoWidth, this.opts.videoHeight)
      : null;
    if (!mapped || !insideVideo(mapped, this.opts.videoWidth, this.opts.videoHeight)) {
      const reason = mapped ? "pointer_left_video" : "pointer_lost";
      this.stop();
      this.opts.onAutoStop?.(reason);
      return;
    }
    const wallT = this.opts.wall.now();
    const maxHz = this.opts.maxHz ?? DEFAULT_MAX_HZ;
    if (wallT - this.lastSentWall < 1 / maxHz - 1e-9) {
      return;
    }
    const mediaT = this.opts.media.currentTime;
    if (mediaT <= this.lastSentMedia) {
      return; // video has not advanced; a duplicate stamp would be refused
    }
    this.opts.client.send({ wall_t: wallT, kind: "cursor", x: mapped.x, y: mapped.y, media_t: mediaT });
    this.lastSentWall = wallT;
    this.lastSentMedia = mediaT;
  }
}
