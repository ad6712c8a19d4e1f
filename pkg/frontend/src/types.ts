export const EMOTION_LABELS = ["neutral", "happy", "sad", "surprise", "fear"] as const;
export const INTENSITIES = ["low", "medium", "high"] as const;

export type EmotionLabel = (typeof EMOTION_LABELS)[number];
export type Intensity = (typeof INTENSITIES)[number];

export interface Edit {
  start_frame: number;
  end_frame: number;
  label: EmotionLabel;
  intensity?: Intensity;
  seed: number;
}

export interface Project {
  schema_version: number;
  n_frames: number;
  fps: number;
  edits: Edit[];
}

export interface JobStatus {
  job_id: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  message: string;
}

export interface TrajectoryPayload {
  edits: { edit: number; va: [number, number][] }[];
}

export interface ApiError {
  code: string;
  message: string;
  detail?: unknown;
}

export interface Violation {
  code: string;
  message: string;
  edits: number[];
}
