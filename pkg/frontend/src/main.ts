import { MapApiClient } from './client.js';
import { drawConsole, pickArtifact } from './render.js';
import {
  applyEvent,
  applySnapshot,
  ConsoleState,
  initialState,
  markConnecting,
  markStale,
} from './state.js';
import type { ArtifactView } from './types.js';
import { defaultView, pan, screenToWorld, zoomAt } from './view.js';

const canvas = document.getElementById('map') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const statusEl = document.getElementById('status')!;
const staleBanner = document.getElementById('stale-banner')!;
const toastEl = document.getElementById('toast')!;
const menuEl = document.getElementById('context-menu')!;
const filterInput = document.getElementById('class-filter') as HTMLInputElement;
const saveButton = document.getElementById('save-button') as HTMLButtonElement;

const client = new MapApiClient({ baseUrl: location.origin });
let state: ConsoleState = initialState();
let view = defaultView();
let selected: number | null = null;
let menuTarget: ArtifactView | null = null;
let dirty = true;

function setState(next: ConsoleState): void {
  if (next !== state) {
    state = next;
    dirty = true;
  }
}

client.openEvents({
  onEvent: (event) => {
    setState(applyEvent(state, event));
    if (event.type === 'map_saved') {
      toast(`map saved: ${event.path}`);
    }
  },
  onOpen: async () => {
    // Resynchronize after (re)connecting; the socket also sends a snapshot
    // event, so whichever lands first wins.
    try {
      const [map, server] = await Promise.all([client.getMap(), client.getState()]);
      setState(applySnapshot(state, map, server));
    } catch {
      setState(markStale(state));
    }
  },
  onDown: () => setState(markStale(state)),
});
setState(markConnecting(state));

// --- rendering loop ---------------------------------------------------------

function resize(): void {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  dirty = true;
}
window.addEventListener('resize', resize);
resize();

function frame(): void {
  if (dirty) {
    dirty = false;
    drawConsole(ctx, state, view, selected);
    statusEl.textContent =
      `${state.runStatus} | t=${state.simTime.toFixed(1)}s frame ${state.frameIndex} | ` +
      `${[...state.artifacts.values()].filter((a) => a.state === 'stable').length} stable / ` +
      `${state.artifacts.size} tracked`;
    staleBanner.classList.toggle('hidden', state.connection === 'live');
  }
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);

// --- interactions ------------------------------------------------------------

let dragging = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener('mousedown', (ev) => {
  if (ev.button === 0) {
    dragging = true;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
  }
});
window.addEventListener('mouseup', () => {
  dragging = false;
});
canvas.addEventListener('mousemove', (ev) => {
  if (dragging) {
    view = pan(view, ev.offsetX - lastX, ev.offsetY - lastY);
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    dirty = true;
  }
});
canvas.addEventListener('wheel', (ev) => {
  ev.preventDefault();
  view = zoomAt(view, canvas.width, canvas.height, ev.offsetX, ev.offsetY, ev.deltaY < 0 ? 1.15 : 1 / 1.15);
  dirty = true;
});
canvas.addEventListener('click', (ev) => {
  hideMenu();
  const hit = pickArtifact(state, view, canvas.width, canvas.height, ev.offsetX, ev.offsetY);
  selected = hit ? hit.id : null;
  dirty = true;
});

canvas.addEventListener('contextmenu', (ev) => {
  ev.preventDefault();
  const hit = pickArtifact(state, view, canvas.width, canvas.height, ev.offsetX, ev.offsetY);
  if (!hit) {
    hideMenu();
    return;
  }
  menuTarget = hit;
  selected = hit.id;
  dirty = true;
  const header = menuEl.querySelector('.menu-header')!;
  header.textContent = `${hit.classLabel} #${hit.id}`;
  menuEl.style.left = `${ev.clientX}px`;
  menuEl.style.top = `${ev.clientY}px`;
  menuEl.classList.remove('hidden');
  const world = screenToWorld(view, canvas.width, canvas.height, ev.offsetX, ev.offsetY);
  void world;
});

function hideMenu(): void {
  menuEl.classList.add('hidden');
  menuTarget = null;
}
window.addEventListener('click', (ev) => {
  if (!menuEl.contains(ev.target as Node)) {
    hideMenu();
  }
});

async function runCommand(action: 'goto' | 'delete'): Promise<void> {
  if (!menuTarget) {
    return;
  }
  const target = menuTarget;
  hideMenu();
  const result = await client.sendCommand({ action, id: target.id });
  if (!result.ok) {
    toast(`${action} failed: ${result.error ?? 'unknown'}`);
    try {
      const [map, server] = await Promise.all([client.getMap(), client.getState()]);
      setState(applySnapshot(state, map, server));
    } catch {
      setState(markStale(state));
    }
  } else if (action === 'goto') {
    toast(`heading to ${target.classLabel} #${target.id}`);
  }
}

document.getElementById('menu-goto')!.addEventListener('click', () => void runCommand('goto'));
document.getElementById('menu-delete')!.addEventListener('click', () => void runCommand('delete'));

filterInput.addEventListener('change', () => {
  const text = filterInput.value.trim();
  const classes = text ? text.split(',').map((s) => s.trim()).filter(Boolean) : null;
  void client.sendCommand({ action: 'set_class_filter', classes });
});

saveButton.addEventListener('click', () => {
  void client.sendCommand({ action: 'save' }).then((result) => {
    if (!result.ok) {
      toast('save failed: no output path configured (start serve with --map-out)');
    }
  });
});

let toastTimer: ReturnType<typeof setTimeout> | null = null;
function toast(message: string): void {
  toastEl.textContent = message;
  toastEl.classList.remove('hidden');
  if (toastTimer) {
    clearTimeout(toastTimer);
  }
  toastTimer = setTimeout(() => toastEl.classList.add('hidden'), 3000);
}
