import { describe, expect, it } from "vitest";

import { BoxEditor, interpolateBox, normalizeCorners } from "../src/boxedit.js";
import { SessionClient } from "../src/client.js";
import type { Box, Keyframe, Segment } from "../src/types.js";
import { FakeAnnotationServer, FakeTime, connect } from "./fakes.js";

describe("normalizeCorners", () => {
  it("is order-free across all four click orders", () => {
    const want: Box = [40, 40, 60, 60];
    const pairs = [
      [{ x: 40, y: 40 }, { x: 60, y: 60 }],
      [{ x: 60, y: 60 }, { x: 40, y: 40 }],
      [{ x: 60, y: 40 }, { x: 40, y: 60 }],
      [{ x: 40, y: 60 }, { x: 60, y: 40 }],
    ] as const;
    for (const [a, b] of pairs) {
      expect(normalizeCorners(a, b)).toEqual(want);
    }
  });

  it("rejects pairs without area", () => {
    expect(normalizeCorners({ x: 5, y: 5 }, { x: 5, y: 5 })).toBeNull();
    expect(normalizeCorners({ x: 5, y: 5 }, { x: 5, y: 9 })).toBeNull();
    expect(normalizeCorners({ x: 5, y: 5 }, { x: 9, y: 5 })).toBeNull();
  });
});

// Reference values produced by the server's interpolation over this track:
// keyframes at 0.4, 2.0, 3.6 and 7.25 inside segments [0,4] and [6.5,9].
const KEYFRAMES: Keyframe[] = [
  { mediaT: 0.4, box: [12.0, 20.0, 112.0, 95.0] },
  { mediaT: 2.0, box: [40.0, 35.0, 150.0, 120.0] },
  { mediaT: 3.6, box: [55.0, 10.0, 140.0, 88.0] },
  { mediaT: 7.25, box: [90.0, 60.0, 210.0, 170.0] },
];
const SEGMENTS: Segment[] = [
  { startT: 0.0, endT: 4.0 },
  { startT: 6.5, endT: 9.0 },
];
const SERVER_REFERENCE: Array<[number, Box | null]> = [
  [0.0, [12.0, 20.0, 112.0, 95.0]],
  [0.4, [12.0, 20.0, 112.0, 95.0]],
  [1.1, [24.25, 26.5625, 128.625, 105.9375]],
  [2.0, [40.0, 35.0, 150.0, 120.0]],
  [2.75, [47.03125, 23.28125, 145.3125, 105.0]],
  [3.6, [55.0, 10.0, 140.0, 88.0]],
  [3.9, [55.0, 10.0, 140.0, 88.0]],
  [5.0, null],
  [6.9, [90.0, 60.0, 210.0, 170.0]],
  [8.5, [90.0, 60.0, 210.0, 170.0]],
];

describe("interpolateBox", () => {
  it("matches the server's interpolation to 1e-6 at 10 sampled times", () => {
    for (const [t, want] of SERVER_REFERENCE) {
      const got = interpolateBox(KEYFRAMES, SEGMENTS, t);
      if (want === null) {
        expect(got).toBeNull();
      } else {
        expect(got).not.toBeNull();
        for (let i = 0; i < 4; i++) {
          expect(Math.abs(got![i] - want[i])).toBeLessThanOrEqual(1e-6);
        }
      }
    }
  });
});

function editorSetup() {
  const server = new FakeAnnotationServer("BBox", 1.0);
  const errors: string[] = [];
  const client = new SessionClient();
  connect(client, server);
  const time = new FakeTime();
  time.video.playbackRate = 1.0;
  const editor = new BoxEditor({
    client,
    media: time.video,
    wall: time.wall,
    onError: (m) => errors.push(m),
  });
  return { server, client, editor, time, errors };
}

describe("BoxEditor", () => {
  it("two clicks place a keyframe at the paused media time", () => {
    const { server, client, editor, time } = editorSetup();
    client.send({ wall_t: 0, kind: "play", media_t: 0 });
    client.send({ wall_t: 0, kind: "begin_annotation", media_t: 0 });
    time.video.play();
    time.advance(1.5);
    client.send({ wall_t: time.wall.now(), kind: "pause", media_t: time.video.currentTime });
    time.video.pause();
    editor.segments = [{ startT: 0, endT: 4 }];

    expect(editor.cornerClick({ x: 60, y: 60 })).toBeNull();
    const box = editor.cornerClick({ x: 40, y: 40 });
    expect(box).toEqual([40, 40, 60, 60]);
    expect(editor.keyframes).toEqual([{ mediaT: 1.5, box: [40, 40, 60, 60] }]);
    expect(server.keyframes.get(1.5)).toEqual([40, 40, 60, 60]);
  });

  it("rejects a zero-area second click and keeps the first corner pending", () => {
    const { editor, errors } = editorSetup();
    editor.cornerClick({ x: 10, y: 10 });
    expect(editor.cornerClick({ x: 10, y: 10 })).toBeNull();
    expect(errors.length).toBe(1);
    expect(editor.pending).toEqual({ x: 10, y: 10 });
  });

  it("delete updates the preview immediately", () => {
    const { editor } = editorSetup();
    editor.segments = [{ startT: 0, endT: 4 }];
    editor.keyframes = [
      { mediaT: 1.0, box: [0, 0, 10, 10] },
      { mediaT: 3.0, box: [20, 20, 30, 30] },
    ];
    expect(editor.previewAt(2.0)).toEqual([10, 10, 20, 20]);
    editor.deleteKeyframe(3.0);
    expect(editor.previewAt(2.0)).toEqual([0, 0, 10, 10]); // held from the only keyframe
  });

  it("rolls back an optimistic keyframe the server refuses", () => {
    const { editor, server } = editorSetup();
    // no begin_annotation: the keyframe lands outside any segment
    editor.setKeyframe([0, 0, 10, 10]);
    expect(server.keyframes.size).toBe(0);
    expect(editor.keyframes.length).toBe(1); // optimistic echo before conflict
    editor.rollback({ kind: "set_keyframe", media_t: 0 });
    expect(editor.keyframes.length).toBe(0);
  });
});
