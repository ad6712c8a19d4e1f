// Application entry point: wires the API client, playback clock, timeline,
// VA plot, and the side-by-side baseline/compiled preview panes.

import { ApiClient, ApiRequestError } from "./api";
import { FrameCache, PlaybackClock } from "./playback";
import { parsePpm, ppmToImageData } from "./ppm";
import { Timeline } from "./timeline";
import { EMOTION_LABELS, INTENSITIES } from "./types";
import type { Edit, EmotionLabel, Intensity, Project, TrajectoryPayload } from "./types";
import { validateEdits } from "./validation";
import { VaPlot } from "./vaPlot";

const api = new ApiClient(
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8765",
);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const baselineCanvas = el<HTMLCanvasElement>("baseline-pane");
const compiledCanvas = el<HTMLCanvasElement>("compiled-pane");
const timelineCanvas = el<HTMLCanvasElement>("timeline");
const vaCanvas = el<HTMLCanvasElement>("va-plot");
const statusLine = el<HTMLDivElement>("status");
const violationsBox = el<HTMLDivElement>("violations");
const frameLabel = el<HTMLSpanElement>("frame-label");
const playButton = el<HTMLButtonElement>("play");
const compileButton = el<HTMLButtonElement>("compile");
const addButton = el<HTMLButtonElement>("add-edit");
const labelSelect = el<HTMLSelectElement>("edit-label");
const intensitySelect = el<HTMLSelectElement>("edit-intensity");

let project: Project | null = null;
let trajectory: TrajectoryPayload | null = null;
let compiling = false;
const frames = new FrameCache<ImageData>();
const clock = new PlaybackClock(1, 25);
const vaPlot = new VaPlot(vaCanvas);

for (const label of EMOTION_LABELS) {
  labelSelect.add(new Option(label, label));
}
for (const intensity of INTENSITIES) {
  intensitySelect.add(new Option(intensity, intensity));
}
labelSelect.value = "happy";
intensitySelect.value = "medium";
labelSelect.addEventListener("change", () => {
  intensitySelect.hidden = labelSelect.value === "neutral";
});

function setStatus(text: string, isError = false): void {
  statusLine.textContent = text;
  statusLine.classList.toggle("error", isError);
}

function showViolations(messages: string[]): void {
  violationsBox.replaceChildren(
    ...messages.map((m) => {
      const div = document.createElement("div");
      div.textContent = m;
      return div;
    }),
  );
  violationsBox.hidden = messages.length === 0;
}

async function drawPane(
  canvas: HTMLCanvasElement,
  frame: number,
  baseline: boolean,
): Promise<void> {
  const key = `${baseline ? "b" : "c"}:${frame}`;
  let img = frames.get(key);
  if (!img) {
    try {
      img = ppmToImageData(parsePpm(await api.getPreview(frame, baseline)));
    } catch {
      return; // not compiled yet, or frame out of range
    }
    frames.set(key, img);
  }
  canvas.width = img.width;
  canvas.height = img.height;
  canvas.getContext("2d")!.putImageData(img, 0, 0);
}

const timeline = new Timeline(timelineCanvas, {
  onSeek: (frame) => clock.seek(frame),
  onSelect: () => {},
  onEditsChanged: (edits) => void pushEdits(edits),
});

async function pushEdits(edits: Edit[]): Promise<void> {
  if (!project) return;
  const local = validateEdits(edits, project.n_frames);
  if (local.length > 0) {
    showViolations(local.map((v) => v.message));
    refresh();
    return;
  }
  try {
    await api.putEdits(edits);
    project.edits = edits;
    showViolations([]);
    setStatus(`${edits.length} edit(s); recompile to see the result`);
  } catch (err) {
    if (err instanceof ApiRequestError) {
      const msgs = err.violations().map((v) => v.message);
      showViolations(msgs.length > 0 ? msgs : [err.message]);
    } else {
      setStatus(String(err), true);
    }
  }
  refresh();
}

function refresh(): void {
  if (!project) return;
  const frame = clock.currentFrame;
  frameLabel.textContent = `frame ${frame} / ${project.n_frames - 1}`;
  timeline.setState(project.edits, project.n_frames, frame);
  vaPlot.render(project, trajectory, frame);
  void drawPane(baselineCanvas, frame, true);
  void drawPane(compiledCanvas, frame, false);
}

clock.onFrame(() => refresh());

playButton.addEventListener("click", () => {
  clock.toggle();
  playButton.textContent = clock.playing ? "Pause" : "Play";
});

addButton.addEventListener("click", () => {
  if (!project) return;
  const label = labelSelect.value as EmotionLabel;
  const span = Math.max(1, Math.round(project.n_frames / 4));
  const start = Math.min(clock.currentFrame, project.n_frames - span);
  const edit: Edit = {
    start_frame: start,
    end_frame: start + span,
    label,
    seed: Math.floor(Math.random() * 1e6),
  };
  if (label !== "neutral") edit.intensity = intensitySelect.value as Intensity;
  void pushEdits([...project.edits, edit]);
});

compileButton.addEventListener("click", async () => {
  if (compiling) return;
  compiling = true;
  compileButton.disabled = true;
  setStatus("compiling…");
  try {
    const job = await api.startCompile();
    const done = await api.waitForJob(job.job_id);
    if (done.state === "failed") {
      setStatus(`compile failed: ${done.message}`, true);
    } else {
      trajectory = await api.getTrajectory();
      frames.clear();
      setStatus("compiled");
    }
  } catch (err) {
    setStatus(err instanceof Error ? err.message : String(err), true);
  } finally {
    compiling = false;
    compileButton.disabled = false;
    refresh();
  }
});

async function init(): Promise<void> {
  try {
    project = await api.getProject();
  } catch (err) {
    setStatus(`cannot reach service: ${err}`, true);
    return;
  }
  clock.nFrames = project.n_frames;
  clock.fps = project.fps;
  try {
    trajectory = await api.getTrajectory();
  } catch {
    trajectory = null; // nothing compiled yet
  }
  setStatus(`loaded project: ${project.n_frames} frames @ ${project.fps} fps`);
  refresh();
}

void init();
