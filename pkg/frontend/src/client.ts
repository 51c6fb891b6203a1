/** Session wire client: assigns sequence numbers, keeps unacknowledged
 * events buffered, and resynchronizes from the server's last accepted seq
 * after rejects or reconnects. Capture never blocks on acks; the server is
 * the authority and merit-rejects roll back optimistic state via callbacks.
 */
import type { SessionEvent, ServerMessage, SessionHandle, Mode } from "./types.js";

export interface Transport {
  send(text: string): void;
  close(): void;
}

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

interface Pending {
  seq: number; // current assignment; renumbered on resync
  event: SessionEvent;
}

export interface SessionClientHandlers {
  onAck?(seq: number, mediaT: number, event: SessionEvent): void;
  /** A merit reject: the server refused this event in its current state. */
  onConflict?(event: SessionEvent, reason: string): void;
  onStatusChange?(status: ConnectionStatus): void;
}

export class SessionClient {
  private transport: Transport | null = null;
  private status: ConnectionStatus = "disconnected";
  private synced = false;
  private inflight: Pending[] = [];
  private unsent: SessionEvent[] = [];
  private lastAcked = 0;
  private nextSeq = 1;
  private lastMediaT = 0;

  constructor(private handlers: SessionClientHandlers = {}) {}

  get connectionStatus(): ConnectionStatus {
    return this.status;
  }

  get lastAckedSeq(): number {
    return this.lastAcked;
  }

  get mediaT(): number {
    return this.lastMediaT;
  }

  get pendingCount(): number {
    return this.inflight.length + this.unsent.length;
  }

  /** Attach a fresh transport. The server opens with a state frame; events
   * queue until that resync arrives. */
  attach(transport: Transport): void {
    this.transport = transport;
    this.synced = false;
    this.setStatus("connecting");
  }

  handleDisconnect(): void {
    this.transport = null;
    this.synced = false;
    // everything inflight is now of unknown fate; resync will sort it out
    this.setStatus("disconnected");
  }

  /** Queue one event; transmits immediately when the connection is synced. */
  send(event: SessionEvent): void {
    if (this.transport && this.synced) {
      const pending: Pending = { seq: this.nextSeq++, event };
      this.inflight.push(pending);
      this.transmit(pending);
    } else {
      this.unsent.push(event);
    }
  }

  handleMessage(text: string): void {
    const msg = JSON.parse(text) as ServerMessage;
    switch (msg.kind) {
      case "state": {
        // reconnect resync: everything at or below last_seq made it
        this.lastAcked = msg.last_seq;
        this.lastMediaT = (msg.snapshot["media_t"] as number) ?? this.lastMediaT;
        this.inflight = this.inflight.filter((p) => p.seq > msg.last_seq);
        this.synced = true;
        this.setStatus("connected");
        this.resendAll();
        break;
      }
      case "ack": {
        const idx = this.inflight.findIndex((p) => p.seq === msg.seq);
        if (idx >= 0) {
          const [acked] = this.inflight.splice(idx, 1);
          this.lastAcked = msg.seq;
          this.lastMediaT = msg.media_t;
          this.handlers.onAck?.(msg.seq, msg.media_t, acked.event);
        }
        break;
      }
      case "reject": {
        const idx = this.inflight.findIndex((p) => p.seq === msg.seq);
        if (idx < 0) {
          break; // stale echo of a seq that was already renumbered
        }
        this.lastAcked = msg.last_seq;
        if (msg.reason !== "seq_gap" && msg.reason !== "seq_repeat") {
          const [refused] = this.inflight.splice(idx, 1);
          this.handlers.onConflict?.(refused.event, msg.reason);
        }
        this.resendAll();
        break;
      }
      case "error": {
        this.setStatus("disconnected");
        break;
      }
    }
  }

  /** Renumber every outstanding event from the server's last accepted seq
   * and put it back on the wire, keeping original order. */
  private resendAll(): void {
    if (!this.transport || !this.synced) return;
    this.inflight.push(...this.unsent.map((event) => ({ seq: 0, event })));
    this.unsent = [];
    let seq = this.lastAcked;
    for (const pending of this.inflight) {
      pending.seq = ++seq;
    }
    this.nextSeq = seq + 1;
    // snapshot: acks may arrive synchronously and splice the live list
    const batch = [...this.inflight];
    for (const pending of batch) {
      this.transmit(pending);
    }
  }

  private transmit(pending: Pending): void {
    this.transport?.send(JSON.stringify({ seq: pending.seq, event: pending.event }));
  }

  private setStatus(status: ConnectionStatus): void {
    if (status !== this.status) {
      this.status = status;
      this.handlers.onStatusChange?.(status);
    }
  }
}

// ---------------------------------------------------------------------------
// REST

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export async function createSession(
  baseUrl: string,
  body: { video_id: string; mode: Mode; speed?: number },
  fetchFn: FetchLike = fetch,
): Promise<SessionHandle> {
  const resp = await fetchFn(`${baseUrl}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) {
    throw new Error(`create session failed: ${resp.status} ${await resp.text()}`);
  }
  return (await resp.json()) as SessionHandle;
}

export async function finalizeSession(
  baseUrl: string,
  sessionId: string,
  fetchFn: FetchLike = fetch,
): Promise<unknown> {
  const resp = await fetchFn(`${baseUrl}/sessions/${sessionId}/finalize`, { method: "POST" });
  if (!resp.ok) {
    throw new Error(`finalize failed: ${resp.status} ${await resp.text()}`);
  }
  return await resp.json();
}

export function sessionSocketUrl(baseUrl: string, sessionId: string): string {
  return `${baseUrl.replace(/^http/, "ws")}/sessions/${sessionId}/events`;
}
