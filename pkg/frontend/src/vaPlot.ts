// Valence-arousal plot: unit-square axes, one polyline per compiled edit,
// and a cursor marking the VA point under the playhead (when the playhead
// is inside an edit).

import type { Project, TrajectoryPayload } from "./types";

const EDIT_COLORS = ["#e4b24a", "#6fb3e0", "#b08ad6", "#7fc98a", "#e08585"];

export interface CursorPoint {
  valence: number;
  arousal: number;
  edit: number;
}

/** VA point under the playhead, or null when the frame is baseline-only. */
export function cursorForFrame(
  project: Project,
  trajectory: TrajectoryPayload,
  frame: number,
): CursorPoint | null {
  for (const entry of trajectory.edits) {
    const edit = project.edits[entry.edit];
    if (!edit) continue;
    if (frame >= edit.start_frame && frame < edit.end_frame) {
      const [valence, arousal] = entry.va[frame - edit.start_frame];
      return { valence, arousal, edit: entry.edit };
    }
  }
  return null;
}

export class VaPlot {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
  }

  private toPx(valence: number, arousal: number): [number, number] {
    const { width, height } = this.canvas;
    return [((valence + 1) / 2) * width, ((1 - arousal) / 2) * height];
  }

  render(
    project: Project | null,
    trajectory: TrajectoryPayload | null,
    frame: number,
  ): void {
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.fillStyle = "#14161a";
    ctx.fillRect(0, 0, width, height);

    ctx.strokeStyle = "#3a3f47";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(width / 2, 0);
    ctx.lineTo(width / 2, height);
    ctx.moveTo(0, height / 2);
    ctx.lineTo(width, height / 2);
    ctx.stroke();
    ctx.strokeRect(0.5, 0.5, width - 1, height - 1);

    ctx.fillStyle = "#8a919c";
    ctx.font = "11px sans-serif";
    ctx.fillText("valence", width - 52, height / 2 - 6);
    ctx.fillText("arousal", width / 2 + 6, 14);

    if (!project || !trajectory) return;

    for (const entry of trajectory.edits) {
      ctx.strokeStyle = EDIT_COLORS[entry.edit % EDIT_COLORS.length];
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      entry.va.forEach(([v, a], i) => {
        const [x, y] = this.toPx(v, a);
        i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
      });
      ctx.stroke();
    }

    const cursor = cursorForFrame(project, trajectory, frame);
    if (cursor) {
      const [x, y] = this.toPx(cursor.valence, cursor.arousal);
      ctx.fillStyle = "#ffffff";
      ctx.beginPath();
      ctx.arc(x, y, 4, 0, 2 * Math.PI);
      ctx.fill();
      ctx.strokeStyle = EDIT_COLORS[cursor.edit % EDIT_COLORS.length];
      ctx.lineWidth = 2;
      ctx.stroke();
    }
  }
}
