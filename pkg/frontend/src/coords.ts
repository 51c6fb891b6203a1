/** Screen/video coordinate mapping. The overlay tracks the element's
 * current bounding rect, so events always land in source-video pixels no
 * matter how the element is scaled or moved. */

export interface ElementRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface VideoPoint {
  x: number;
  y: number;
}

export function clientToVideo(
  clientX: number,
  clientY: number,
  rect: ElementRect,
  videoWidth: number,
  videoHeight: number,
): VideoPoint {
  const scaleX = videoWidth / rect.width;
  const scaleY = videoHeight / rect.height;
  return {
    x: (clientX - rect.left) * scaleX,
    y: (clientY - rect.top) * scaleY,
  };
}

export function videoToClient(
  x: number,
  y: number,
  rect: ElementRect,
  videoWidth: number,
  videoHeight: number,
): { clientX: number; clientY: number } {
  return {
    clientX: rect.left + (x / videoWidth) * rect.width,
    clientY: rect.top + (y / videoHeight) * rect.height,
  };
}

export function insideVideo(p: VideoPoint, videoWidth: number, videoHeight: number): boolean {
  return p.x >= 0 && p.x < videoWidth && p.y >= 0 && p.y < videoHeight;
}
