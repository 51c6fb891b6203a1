/** Playback control over the decoding video element. The element's clock is
 * authoritative: every control event is stamped with its current time. */
import type { SessionClient } from "./client.js";
import type { WallClock } from "./capture.js";
import { PLAYBACK_SPEEDS, DEFAULT_SPEED } from "./types.js";

export interface VideoSurface {
  currentTime: number;
  readonly paused: boolean;
  playbackRate: number;
  play(): unknown;
  pause(): void;
}

export class PlaybackController {
  private speed: number = DEFAULT_SPEED;

  constructor(
    private client: SessionClient,
    private video: VideoSurface,
    private wall: WallClock,
  ) {
    this.video.playbackRate = this.speed;
  }

  get currentSpeed(): number {
    return this.speed;
  }

  setSpeed(speed: number): void {
    if (!(PLAYBACK_SPEEDS as readonly number[]).includes(speed)) {
      throw new Error(`speed must be one of ${PLAYBACK_SPEEDS.join(", ")}`);
    }
    this.speed = speed;
    this.video.playbackRate = speed;
  }

  play(): void {
    this.video.play();
    this.client.send({ wall_t: this.wall.now(), kind: "play", media_t: this.video.currentTime });
  }

  pause(): void {
    this.video.pause();
    this.client.send({ wall_t: this.wall.now(), kind: "pause", media_t: this.video.currentTime });
  }

  /** Frame-accurate navigation; only legal while paused. */
  seek(t: number): void {
    if (!this.video.paused) {
      throw new Error("seek while playing is not part of the workflow; pause first");
    }
    this.video.currentTime = t;
    this.client.send({ wall_t: this.wall.now(), kind: "seek", t });
  }

  endSession(): void {
    if (!this.video.paused) {
      this.pause();
    }
    this.client.send({ wall_t: this.wall.now(), kind: "end_session" });
  }
}
