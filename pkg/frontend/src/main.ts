/** DOM wiring: video element + overlay canvas + controls, talking to the
 * annotation server over REST and the per-session websocket. */
import { SessionClient, createSession, finalizeSession, sessionSocketUrl, type Transport } from "./client.js";
import { OtfCaptureLoop, type PointerState } from "./capture.js";
import { BoxEditor } from "./boxedit.js";
import { PlaybackController } from "./playback.js";
import { drawBox, drawTimeline, drawTrail, type TrailPoint } from "./overlay.js";
import { clientToVideo } from "./coords.js";
import { PLAYBACK_SPEEDS, type Mode, type SessionEvent } from "./types.js";

const baseUrl = (window as { LIVEANNO_SERVER?: string }).LIVEANNO_SERVER ?? "http://127.0.0.1:8000";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class WebSocketTransport implements Transport {
  constructor(private ws: WebSocket) {}
  send(text: string): void {
    this.ws.send(text);
  }
  close(): void {
    this.ws.close();
  }
}

async function start(): Promise<void> {
  const video = el<HTMLVideoElement>("video");
  const overlay = el<HTMLCanvasElement>("overlay");
  const timeline = el<HTMLCanvasElement>("timeline");
  const statusEl = el<HTMLSpanElement>("status");
  const warnEl = el<HTMLSpanElement>("warning");
  const videoSelect = el<HTMLSelectElement>("video-select");
  const modeSelect = el<HTMLSelectElement>("mode-select");
  const speedSelect = el<HTMLSelectElement>("speed-select");
  const holdToggle = el<HTMLInputElement>("hold-toggle");

  for (const s of PLAYBACK_SPEEDS) {
    const opt = document.createElement("option");
    opt.value = String(s);
    opt.textContent = `${s}x`;
    if (s === 0.2) opt.selected = true;
    speedSelect.appendChild(opt);
  }

  const videos = (await (await fetch(`${baseUrl}/videos`)).json()) as {
    video_id: string;
    fps: number;
    width: number;
    height: number;
    duration_s: number;
  }[];
  for (const v of videos) {
    const opt = document.createElement("option");
    opt.value = v.video_id;
    opt.textContent = v.video_id;
    videoSelect.appendChild(opt);
  }

  let sessionId: string | null = null;
  let capture: OtfCaptureLoop | null = null;
  let editor: BoxEditor | null = null;
  let playback: PlaybackController | null = null;
  const trail: TrailPoint[] = [];
  const wall = { now: () => performance.now() / 1000 };
  const pointerState: { current: PointerState | null } = { current: null };

  const client = new SessionClient({
    onStatusChange: (s) => (statusEl.textContent = s),
    onConflict: (event, reason) => {
      warnEl.textContent = `server refused ${event.kind}: ${reason}`;
      if (editor) editor.rollback(event as SessionEvent & { box?: never });
    },
  });

  function connect(id: string): void {
    const ws = new WebSocket(sessionSocketUrl(baseUrl, id));
    const transport = new WebSocketTransport(ws);
    ws.onopen = () => client.attach(transport);
    ws.onmessage = (e) => client.handleMessage(String(e.data));
    ws.onclose = () => {
      client.handleDisconnect();
      if (sessionId === id) {
        setTimeout(() => connect(id), 500); // resync picks up buffered events
      }
    };
  }

  el<HTMLButtonElement>("create").onclick = async () => {
    const meta = videos.find((v) => v.video_id === videoSelect.value);
    if (!meta) return;
    const mode = modeSelect.value as Mode;
    const speed = Number(speedSelect.value);
    const handle = await createSession(baseUrl, { video_id: meta.video_id, mode, speed });
    sessionId = handle.session_id;
    video.src = `${baseUrl}/videos/files/${meta.video_id}.mp4`;
    connect(handle.session_id);

    playback = new PlaybackController(client, video, wall);
    playback.setSpeed(speed);
    editor = new BoxEditor({
      client,
      media: video,
      wall,
      onError: (m) => (warnEl.textContent = m),
    });
    capture = new OtfCaptureLoop({
      client,
      media: video,
      wall,
      pointer: { read: () => pointerState.current },
      getRect: () => video.getBoundingClientRect(),
      videoWidth: meta.width,
      videoHeight: meta.height,
      onAutoStop: (reason) => (warnEl.textContent = `annotation stopped: ${reason}`),
    });

    const paint = () => {
      const rect = video.getBoundingClientRect();
      overlay.width = rect.width;
      overlay.height = rect.height;
      const ctx = overlay.getContext("2d")!;
      ctx.clearRect(0, 0, overlay.width, overlay.height);
      capture?.tick();
      if (mode === "OTF") {
        drawTrail(ctx, trail.slice(-120), rect, meta.width, meta.height);
      } else if (editor) {
        const preview = editor.previewAt(video.currentTime);
        if (preview) drawBox(ctx, preview, rect, meta.width, meta.height, "#ffd000", true);
        const tctx = timeline.getContext("2d")!;
        drawTimeline(
          tctx,
          editor.keyframes.map((k) => k.mediaT),
          meta.duration_s,
          timeline.width,
          timeline.height,
          video.currentTime,
        );
      }
      requestAnimationFrame(paint);
    };
    requestAnimationFrame(paint);
  };

  overlay.addEventListener("pointermove", (e) => {
    pointerState.current = { clientX: e.clientX, clientY: e.clientY };
    if (capture?.active) {
      const rect = video.getBoundingClientRect();
      const meta = videos.find((v) => v.video_id === videoSelect.value)!;
      const p = clientToVideo(e.clientX, e.clientY, rect, meta.width, meta.height);
      trail.push(p);
    }
  });
  overlay.addEventListener("pointerleave", () => (pointerState.current = null));
  overlay.addEventListener("pointerdown", (e) => {
    if (modeSelect.value === "OTF") {
      if (holdToggle.checked) {
        capture?.active ? capture.stop() : capture?.begin(); // toggle gesture
      } else {
        capture?.begin(); // press-and-hold gesture
      }
    } else if (editor) {
      const meta = videos.find((v) => v.video_id === videoSelect.value)!;
      const rect = video.getBoundingClientRect();
      if (video.paused) {
        editor.cornerClick(clientToVideo(e.clientX, e.clientY, rect, meta.width, meta.height));
      } else {
        warnEl.textContent = "pause before placing keyframes";
      }
    }
  });
  overlay.addEventListener("pointerup", () => {
    if (modeSelect.value === "OTF" && !holdToggle.checked) {
      capture?.stop();
    }
  });

  el<HTMLButtonElement>("play").onclick = () => playback?.play();
  el<HTMLButtonElement>("pause").onclick = () => playback?.pause();
  el<HTMLButtonElement>("finalize").onclick = async () => {
    if (!sessionId) return;
    capture?.stop();
    playback?.endSession();
    const id = sessionId;
    sessionId = null; // stop the reconnect loop
    setTimeout(async () => {
      const result = await finalizeSession(baseUrl, id);
      statusEl.textContent = `finalized: ${JSON.stringify((result as { timing: unknown }).timing)}`;
    }, 300);
  };
  speedSelect.onchange = () => playback?.setSpeed(Number(speedSelect.value));
}

start().catch((err) => {
  document.body.insertAdjacentText("beforeend", `failed to start: ${err}`);
});
