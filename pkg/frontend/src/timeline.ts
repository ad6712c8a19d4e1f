// Timeline strip: frame ruler, playhead, and draggable/resizable edit
// blocks.  Pointer interaction produces tentative edit lists; the caller
// decides when to push them to the server.

import type { Edit } from "./types";

const EDIT_COLORS = ["#e4b24a", "#6fb3e0", "#b08ad6", "#7fc98a", "#e08585"];
const HANDLE_PX = 6;

type DragMode = "move" | "resize-start" | "resize-end";

interface DragState {
  editIndex: number;
  mode: DragMode;
  grabOffsetFrames: number; // pointer frame minus edit start, for moves
}

export interface TimelineCallbacks {
  onSeek(frame: number): void;
  onEditsChanged(edits: Edit[]): void;
  onSelect(editIndex: number | null): void;
}

/** Pure drag arithmetic, exported so tests can exercise it without a DOM. */
export function applyDrag(
  edits: Edit[],
  index: number,
  mode: DragMode,
  targetFrame: number,
  grabOffsetFrames: number,
  nFrames: number,
): Edit[] {
  const out = edits.map((e) => ({ ...e }));
  const e = out[index];
  const span = e.end_frame - e.start_frame;
  if (mode === "move") {
    let start = Math.round(targetFrame - grabOffsetFrames);
    start = Math.max(0, Math.min(nFrames - span, start));
    e.start_frame = start;
    e.end_frame = start + span;
  } else if (mode === "resize-start") {
    e.start_frame = Math.max(0, Math.min(e.end_frame - 1, Math.round(targetFrame)));
  } else {
    e.end_frame = Math.max(e.start_frame + 1, Math.min(nFrames, Math.round(targetFrame)));
  }
  return out;
}

export class Timeline {
  private ctx: CanvasRenderingContext2D;
  private drag: DragState | null = null;
  private edits: Edit[] = [];
  private nFrames = 1;
  private playhead = 0;
  private selected: number | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private callbacks: TimelineCallbacks,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
    canvas.addEventListener("pointerdown", (ev) => this.onPointerDown(ev));
    canvas.addEventListener("pointermove", (ev) => this.onPointerMove(ev));
    canvas.addEventListener("pointerup", (ev) => this.onPointerUp(ev));
  }

  setState(edits: Edit[], nFrames: number, playhead: number): void {
    this.edits = edits;
    this.nFrames = Math.max(1, nFrames);
    this.playhead = playhead;
    this.render();
  }

  get selectedEdit(): number | null {
    return this.selected;
  }

  private frameToX(frame: number): number {
    return (frame / this.nFrames) * this.canvas.width;
  }

  private xToFrame(x: number): number {
    return (x / this.canvas.width) * this.nFrames;
  }

  private hitTest(x: number, y: number): DragState | null {
    const bandTop = 22;
    const bandBottom = this.canvas.height - 4;
    if (y < bandTop || y > bandBottom) return null;
    for (let i = this.edits.length - 1; i >= 0; i--) {
      const e = this.edits[i];
      const x0 = this.frameToX(e.start_frame);
      const x1 = this.frameToX(e.end_frame);
      if (x < x0 - HANDLE_PX || x > x1 + HANDLE_PX) continue;
      if (Math.abs(x - x0) <= HANDLE_PX) {
        return { editIndex: i, mode: "resize-start", grabOffsetFrames: 0 };
      }
      if (Math.abs(x - x1) <= HANDLE_PX) {
        return { editIndex: i, mode: "resize-end", grabOffsetFrames: 0 };
      }
      if (x >= x0 && x <= x1) {
        return {
          editIndex: i,
          mode: "move",
          grabOffsetFrames: this.xToFrame(x) - e.start_frame,
        };
      }
    }
    return null;
  }

  private onPointerDown(ev: PointerEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const x = ev.clientX - rect.left;
    const y = ev.clientY - rect.top;
    const hit = this.hitTest(x, y);
    if (hit) {
      this.drag = hit;
      this.selected = hit.editIndex;
      this.canvas.setPointerCapture(ev.pointerId);
      this.callbacks.onSelect(hit.editIndex);
    } else {
      this.selected = null;
      this.callbacks.onSelect(null);
      this.callbacks.onSeek(Math.floor(this.xToFrame(x)));
    }
    this.render();
  }

  private onPointerMove(ev: PointerEvent): void {
    if (!this.drag) return;
    const rect = this.canvas.getBoundingClientRect();
    const frame = this.xToFrame(ev.clientX - rect.left);
    this.edits = applyDrag(
      this.edits,
      this.drag.editIndex,
      this.drag.mode,
      frame,
      this.drag.grabOffsetFrames,
      this.nFrames,
    );
    this.render();
  }

  private onPointerUp(ev: PointerEvent): void {
    if (!this.drag) return;
    this.canvas.releasePointerCapture(ev.pointerId);
    this.drag = null;
    this.callbacks.onEditsChanged(this.edits.map((e) => ({ ...e })));
  }

  private render(): void {
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.fillStyle = "#14161a";
    ctx.fillRect(0, 0, width, height);

    // ruler ticks every ~10% of the timeline, snapped to whole frames
    ctx.strokeStyle = "#3a3f47";
    ctx.fillStyle = "#8a919c";
    ctx.font = "10px sans-serif";
    const step = Math.max(1, Math.round(this.nFrames / 10));
    for (let f = 0; f <= this.nFrames; f += step) {
      const x = this.frameToX(f);
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, 8);
      ctx.stroke();
      ctx.fillText(String(f), x + 2, 16);
    }

    this.edits.forEach((e, i) => {
      const x0 = this.frameToX(e.start_frame);
      const x1 = this.frameToX(e.end_frame);
      ctx.fillStyle = EDIT_COLORS[i % EDIT_COLORS.length];
      ctx.globalAlpha = i === this.selected ? 1.0 : 0.75;
      ctx.fillRect(x0, 24, x1 - x0, height - 30);
      ctx.globalAlpha = 1.0;
      ctx.fillStyle = "#14161a";
      ctx.font = "11px sans-serif";
      const label = e.intensity ? `${e.label}/${e.intensity}` : e.label;
      ctx.fillText(label, x0 + 4, 38, Math.max(8, x1 - x0 - 8));
    });

    const px = this.frameToX(this.playhead);
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(px, 0);
    ctx.lineTo(px, height);
    ctx.stroke();
  }
}
