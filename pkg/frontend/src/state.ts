import type {
  ArtifactView,
  GoalView,
  MapSnapshot,
  RobotPose,
  ServerEvent,
  ServerState,
} from './types.js';

export type ConnectionStatus = 'connecting' | 'live' | 'stale';

export interface ConsoleState {
  artifacts: Map<number, ArtifactView>;
  robot: RobotPose | null;
  goal: GoalView | null;
  classFilter: string[] | null;
  connection: ConnectionStatus;
  runStatus: string;
  simTime: number;
  frameIndex: number;
  lastSeq: number;
  notice: string | null;
}

export function initialState(): ConsoleState {
  return {
    artifacts: new Map(),
    robot: null,
    goal: null,
    classFilter: null,
    connection: 'connecting',
    runStatus: 'unknown',
    simTime: 0,
    frameIndex: 0,
    lastSeq: -1,
    notice: null,
  };
}

function cloned(state: ConsoleState): ConsoleState {
  return { ...state, artifacts: new Map(state.artifacts) };
}

export function applySnapshot(
  state: ConsoleState,
  map: MapSnapshot,
  server: ServerState,
): ConsoleState {
  const next = cloned(state);
  // A snapshot resynchronizes the stable buffer wholesale; temporary
  // artifacts reappear as their detections stream in.
  next.artifacts = new Map();
  for (const a of map.artifacts) {
    next.artifacts.set(a.id, {
      id: a.id,
      classLabel: a.class,
      position: a.position,
      radius: a.radius,
      viewAngle: a.view_angle,
      observations: a.observations,
      state: 'stable',
    });
  }
  next.robot = server.robot_pose;
  next.goal = server.goal
    ? { artifactId: server.goal.artifact_id, x: server.goal.x, y: server.goal.y, heading: server.goal.heading, reached: false }
    : null;
  next.classFilter = server.class_filter;
  next.runStatus = server.status;
  next.simTime = server.sim_time;
  next.frameIndex = server.frame_index;
  next.connection = 'live';
  return next;
}

export function applyEvent(state: ConsoleState, event: ServerEvent): ConsoleState {
  if (event.type === 'ping') {
    return state;
  }
  if (event.type === 'snapshot') {
    return applySnapshot(state, event.map, event.state);
  }
  // Events arrive in a total order; drop stale replays after a resync.
  if (event.seq <= state.lastSeq) {
    return state;
  }
  const next = cloned(state);
  next.lastSeq = event.seq;
  switch (event.type) {
    case 'frame': {
      next.robot = event.robot_pose;
      next.simTime = event.timestamp;
      next.frameIndex = event.index;
      for (const d of event.detections) {
        const existing = next.artifacts.get(d.id);
        next.artifacts.set(d.id, {
          id: d.id,
          classLabel: d.class,
          position: existing?.state === 'stable' ? existing.position : d.position,
          radius: existing?.state === 'stable' ? existing.radius : d.radius,
          viewAngle: d.view_angle,
          observations: (existing?.observations ?? 0) + 1,
          state: existing?.state ?? (d.event === 'stable_hit' ? 'stable' : 'temporary'),
        });
      }
      for (const id of event.promoted) {
        const artifact = next.artifacts.get(id);
        if (artifact) {
          next.artifacts.set(id, { ...artifact, state: 'stable' });
        }
      }
      break;
    }
    case 'artifact_deleted':
      next.artifacts.delete(event.id);
      break;
    case 'goal':
      next.goal = {
        artifactId: event.artifact_id,
        x: event.x,
        y: event.y,
        heading: event.heading,
        reached: false,
      };
      break;
    case 'goal_reached':
      if (next.goal && next.goal.artifactId === event.id) {
        next.goal = { ...next.goal, reached: true };
      }
      break;
    case 'class_filter':
      next.classFilter = event.classes;
      break;
    case 'map_saved':
      next.notice = `map saved to ${event.path}`;
      break;
    case 'run_finished':
      next.runStatus = 'finished';
      break;
    case 'finalized':
      break;
  }
  return next;
}

export function markStale(state: ConsoleState): ConsoleState {
  return { ...state, connection: 'stale' };
}

export function markConnecting(state: ConsoleState): ConsoleState {
  return { ...state, connection: 'connecting' };
}

export function selectableArtifacts(state: ConsoleState): ArtifactView[] {
  return [...state.artifacts.values()].sort((a, b) => a.id - b.id);
}
