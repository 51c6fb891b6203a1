import { describe, expect, it } from "vitest";

import { clientToVideo, insideVideo, videoToClient } from "../src/coords.js";
import { PlaybackController } from "../src/playback.js";
import { SessionClient } from "../src/client.js";
import { FakeAnnotationServer, FakeTime, connect } from "./fakes.js";

describe("coordinate mapping", () => {
  const rect = { left: 17, top: 23, width: 640, height: 480 };

  it("round-trips video -> client -> video", () => {
    for (const [x, y] of [[0, 0], [160, 120], [319.5, 239.25]] as const) {
      const c = videoToClient(x, y, rect, 320, 240);
      const back = clientToVideo(c.clientX, c.clientY, rect, 320, 240);
      expect(back.x).toBeCloseTo(x, 9);
      expect(back.y).toBeCloseTo(y, 9);
    }
  });

  it("re-derives the mapping when the element is resized", () => {
    const before = clientToVideo(337, 263, rect, 320, 240);
    const resized = { left: 17, top: 23, width: 320, height: 240 }; // window shrank
    const after = clientToVideo(177, 143, resized, 320, 240);
    expect(before.x).toBeCloseTo(160, 9);
    expect(after.x).toBeCloseTo(160, 9);
    expect(before.y).toBeCloseTo(after.y, 9);
  });

  it("flags points outside the video frame", () => {
    expect(insideVideo({ x: -0.1, y: 10 }, 320, 240)).toBe(false);
    expect(insideVideo({ x: 10, y: 240 }, 320, 240)).toBe(false);
    expect(insideVideo({ x: 0, y: 0 }, 320, 240)).toBe(true);
  });
});

describe("PlaybackController", () => {
  it("limits speeds to the supported presets", () => {
    const server = new FakeAnnotationServer("OTF", 0.2);
    const client = new SessionClient();
    connect(client, server);
    const time = new FakeTime();
    const playback = new PlaybackController(client, time.video, time.wall);
    playback.setSpeed(0.1);
    expect(time.video.playbackRate).toBe(0.1);
    expect(() => playback.setSpeed(0.3)).toThrow();
  });

  it("refuses to seek while playing", () => {
    const server = new FakeAnnotationServer("OTF", 0.2);
    const client = new SessionClient();
    connect(client, server);
    const time = new FakeTime();
    const playback = new PlaybackController(client, time.video, time.wall);
    playback.play();
    expect(() => playback.seek(3)).toThrow();
    playback.pause();
    playback.seek(3);
    expect(time.video.currentTime).toBe(3);
  });
});
