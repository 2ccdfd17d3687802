/** Pan/zoom transform between map meters and canvas pixels. */

export interface ViewTransform {
  scale: number; // pixels per meter
  centerX: number; // map coords at the canvas center
  centerY: number;
}

export const MIN_SCALE = 4;
export const MAX_SCALE = 400;

export function defaultView(): ViewTransform {
  return { scale: 30, centerX: 0, centerY: 0 };
}

export function worldToScreen(
  view: ViewTransform,
  width: number,
  height: number,
  x: number,
  y: number,
): { x: number; y: number } {
  // Map y grows north; canvas y grows down.
  return {
    x: width / 2 + (x - view.centerX) * view.scale,
    y: height / 2 - (y - view.centerY) * view.scale,
  };
}

export function screenToWorld(
  view: ViewTransform,
  width: number,
  height: number,
  px: number,
  py: number,
): { x: number; y: number } {
  return {
    x: view.centerX + (px - width / 2) / view.scale,
    y: view.centerY - (py - height / 2) / view.scale,
  };
}

export function zoomAt(
  view: ViewTransform,
  width: number,
  height: number,
  px: number,
  py: number,
  factor: number,
): ViewTransform {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, view.scale * factor));
  if (scale === view.scale) {
    return view;
  }
  // Keep the point under the cursor fixed.
  const anchor = screenToWorld(view, width, height, px, py);
  const centerX = anchor.x - (px - width / 2) / scale;
  const centerY = anchor.y + (py - height / 2) / scale;
  return { scale, centerX, centerY };
}

export function pan(view: ViewTransform, dxPixels: number, dyPixels: number): ViewTransform {
  return {
    ...view,
    centerX: view.centerX - dxPixels / view.scale,
    centerY: view.centerY + dyPixels / view.scale,
  };
}
