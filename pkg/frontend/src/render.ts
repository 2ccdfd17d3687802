import { classColor } from './colors.js';
import type { ConsoleState } from './state.js';
import type { ArtifactView } from './types.js';
import { ViewTransform, worldToScreen } from './view.js';

const GRID_SPACING_M = 2;

export function drawConsole(
  ctx: CanvasRenderingContext2D,
  state: ConsoleState,
  view: ViewTransform,
  selected: number | null,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = '#14161a';
  ctx.fillRect(0, 0, width, height);
  drawGrid(ctx, view, width, height);

  for (const artifact of state.artifacts.values()) {
    drawArtifact(ctx, view, width, height, artifact, artifact.id === selected);
  }
  if (state.goal) {
    drawGoal(ctx, view, width, height, state.goal.x, state.goal.y, state.goal.reached);
  }
  if (state.robot) {
    drawRobot(ctx, view, width, height, state.robot.x, state.robot.y, state.robot.yaw);
  }
}

function drawGrid(
  ctx: CanvasRenderingContext2D,
  view: ViewTransform,
  width: number,
  height: number,
): void {
  ctx.strokeStyle = '#23262c';
  ctx.lineWidth = 1;
  const halfW = width / 2 / view.scale;
  const halfH = height / 2 / view.scale;
  const x0 = Math.floor((view.centerX - halfW) / GRID_SPACING_M) * GRID_SPACING_M;
  const y0 = Math.floor((view.centerY - halfH) / GRID_SPACING_M) * GRID_SPACING_M;
  for (let x = x0; x <= view.centerX + halfW; x += GRID_SPACING_M) {
    const a = worldToScreen(view, width, height, x, view.centerY - halfH);
    const b = worldToScreen(view, width, height, x, view.centerY + halfH);
    line(ctx, a.x, a.y, b.x, b.y);
  }
  for (let y = y0; y <= view.centerY + halfH; y += GRID_SPACING_M) {
    const a = worldToScreen(view, width, height, view.centerX - halfW, y);
    const b = worldToScreen(view, width, height, view.centerX + halfW, y);
    line(ctx, a.x, a.y, b.x, b.y);
  }
}

function drawArtifact(
  ctx: CanvasRenderingContext2D,
  view: ViewTransform,
  width: number,
  height: number,
  artifact: ArtifactView,
  isSelected: boolean,
): void {
  const p = worldToScreen(view, width, height, artifact.position.x, artifact.position.y);
  const r = Math.max(3, artifact.radius * view.scale);
  const color = classColor(artifact.classLabel);

  ctx.beginPath();
  ctx.arc(p.x, p.y, r, 0, Math.PI * 2);
  ctx.strokeStyle = color;
  ctx.lineWidth = isSelected ? 3 : 1.5;
  ctx.setLineDash(artifact.state === 'temporary' ? [4, 4] : []);
  ctx.stroke();
  ctx.setLineDash([]);

  // Approach-heading tick on the circle.
  const tick = artifact.viewAngle;
  ctx.beginPath();
  ctx.moveTo(p.x + r * Math.cos(-tick), p.y + r * Math.sin(-tick));
  ctx.lineTo(p.x + (r + 6) * Math.cos(-tick), p.y + (r + 6) * Math.sin(-tick));
  ctx.stroke();

  ctx.beginPath();
  ctx.arc(p.x, p.y, 3, 0, Math.PI * 2);
  ctx.fillStyle = color;
  ctx.fill();

  ctx.fillStyle = '#c8ccd4';
  ctx.font = '11px system-ui, sans-serif';
  ctx.fillText(
    `${artifact.classLabel} #${artifact.id} z=${artifact.position.z.toFixed(2)}`,
    p.x + r + 4,
    p.y - 4,
  );
}

function drawRobot(
  ctx: CanvasRenderingContext2D,
  view: ViewTransform,
  width: number,
  height: number,
  x: number,
  y: number,
  yaw: number,
): void {
  const p = worldToScreen(view, width, height, x, y);
  const size = 9;
  ctx.save();
  ctx.translate(p.x, p.y);
  ctx.rotate(-yaw);
  ctx.beginPath();
  ctx.moveTo(size, 0);
  ctx.lineTo(-size * 0.7, size * 0.6);
  ctx.lineTo(-size * 0.7, -size * 0.6);
  ctx.closePath();
  ctx.fillStyle = '#f5f7fa';
  ctx.fill();
  ctx.restore();
}

function drawGoal(
  ctx: CanvasRenderingContext2D,
  view: ViewTransform,
  width: number,
  height: number,
  x: number,
  y: number,
  reached: boolean,
): void {
  const p = worldToScreen(view, width, height, x, y);
  ctx.strokeStyle = reached ? '#6fcf6f' : '#f2c94c';
  ctx.lineWidth = 2;
  line(ctx, p.x - 7, p.y - 7, p.x + 7, p.y + 7);
  line(ctx, p.x - 7, p.y + 7, p.x + 7, p.y - 7);
}

function line(ctx: CanvasRenderingContext2D, x0: number, y0: number, x1: number, y1: number): void {
  ctx.beginPath();
  ctx.moveTo(x0, y0);
  ctx.lineTo(x1, y1);
  ctx.stroke();
}

/** Nearest artifact within `tolerancePx` of a canvas point, for picking. */
export function pickArtifact(
  state: ConsoleState,
  view: ViewTransform,
  width: number,
  height: number,
  px: number,
  py: number,
  tolerancePx = 12,
): ArtifactView | null {
  let best: ArtifactView | null = null;
  let bestDist = Infinity;
  for (const artifact of state.artifacts.values()) {
    const p = worldToScreen(view, width, height, artifact.position.x, artifact.position.y);
    const dist = Math.hypot(p.x - px, p.y - py);
    const reach = Math.max(tolerancePx, artifact.radius * view.scale);
    if (dist <= reach && dist < bestDist) {
      best = artifact;
      bestDist = dist;
    }
  }
  return best;
}
