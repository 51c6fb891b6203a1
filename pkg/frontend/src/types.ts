/** Wire types shared with the annotation server (JSON text frames). */

export type Mode = "OTF" | "BBox";

/** [xMin, yMin, xMax, yMax] in source-video pixels. */
export type Box = [number, number, number, number];

export type EventKind =
  | "play"
  | "pause"
  | "cursor"
  | "begin_annotation"
  | "stop_annotation"
  | "set_keyframe"
  | "delete_keyframe"
  | "seek"
  | "end_session";

export interface SessionEvent {
  wall_t: number;
  kind: EventKind;
  x?: number;
  y?: number;
  box?: Box;
  t?: number;
  /** Client media-time stamp from the decoding video element. */
  media_t?: number;
}

export interface WireEvent {
  seq: number;
  event: SessionEvent;
}

export interface AckMessage {
  kind: "ack";
  seq: number;
  media_t: number;
}

export interface RejectMessage {
  kind: "reject";
  seq: number;
  reason: string;
  last_seq: number;
}

export interface StateSyncMessage {
  kind: "state";
  last_seq: number;
  snapshot: Record<string, unknown>;
}

export interface ServerErrorMessage {
  kind: "error";
  status: number;
  detail: string;
}

export type ServerMessage = AckMessage | RejectMessage | StateSyncMessage | ServerErrorMessage;

export interface SessionHandle {
  session_id: string;
  video_id: string;
  mode: Mode;
  speed: number;
  created_at: string;
  status: "live" | "closed";
  snapshot: Record<string, unknown>;
}

export interface Keyframe {
  mediaT: number;
  box: Box;
}

export interface Segment {
  startT: number;
  endT: number;
}

export const PLAYBACK_SPEEDS = [0.1, 0.2, 0.5, 1.0] as const;
export const DEFAULT_SPEED = 0.2;
