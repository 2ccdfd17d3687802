export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export type ArtifactState = 'temporary' | 'stable';

export interface ArtifactView {
  id: number;
  classLabel: string;
  position: Vec3;
  radius: number;
  viewAngle: number;
  observations: number;
  state: ArtifactState;
}

export interface RobotPose {
  x: number;
  y: number;
  z: number;
  yaw: number;
}

export interface GoalView {
  artifactId: number;
  x: number;
  y: number;
  heading: number;
  reached: boolean;
}

// Wire formats (service JSON).

export interface MapSnapshot {
  meta: { run_id: string; created: string; config_digest: string };
  artifacts: Array<{
    id: number;
    class: string;
    position: { x: number; y: number; z: number };
    radius: number;
    view_angle: number;
    observations: number;
  }>;
}

export interface ServerState {
  status: string;
  sim_time: number;
  frame_index: number;
  robot_pose: { x: number; y: number; z: number; yaw: number } | null;
  goal: { artifact_id: number; x: number; y: number; heading: number } | null;
  class_filter: string[] | null;
  counts: { temporary: number; stable: number };
}

export interface DetectionEvent {
  id: number;
  event: 'new' | 'updated' | 'stable_hit';
  class: string;
  position: { x: number; y: number; z: number };
  radius: number;
  view_angle: number;
  sources: string[];
}

export type ServerEvent =
  | { seq?: number; type: 'snapshot'; map: MapSnapshot; state: ServerState }
  | {
      seq: number;
      type: 'frame';
      index: number;
      timestamp: number;
      robot_pose: { x: number; y: number; z: number; yaw: number };
      detections: DetectionEvent[];
      promoted: number[];
      dropped: Array<{ class: string; reason: string }>;
    }
  | { seq: number; type: 'goal'; artifact_id: number; x: number; y: number; heading: number }
  | { seq: number; type: 'goal_reached'; id: number }
  | { seq: number; type: 'artifact_deleted'; id: number }
  | { seq: number; type: 'class_filter'; classes: string[] | null }
  | { seq: number; type: 'map_saved'; path: string }
  | { seq: number; type: 'run_finished'; frames: number }
  | { seq: number; type: 'finalized'; artifacts: number }
  | { type: 'ping' };

export type Command =
  | { action: 'goto'; id: number }
  | { action: 'delete'; id: number }
  | { action: 'set_class_filter'; classes: string[] | null }
  | { action: 'save'; path?: string };

export interface CommandResult {
  ok: boolean;
  error?: string;
  detail?: string;
  [key: string]: unknown;
}
