import { describe, expect, it } from "vitest";
import { applyDrag } from "../src/timeline";
import { cursorForFrame } from "../src/vaPlot";
import type { Edit, Project, TrajectoryPayload } from "../src/types";

const edits: Edit[] = [
  { start_frame: 30, end_frame: 150, label: "happy", intensity: "medium", seed: 1 },
];

describe("applyDrag", () => {
  it("moves an edit preserving its span", () => {
    const out = applyDrag(edits, 0, "move", 60, 10, 240);
    expect(out[0].start_frame).toBe(50);
    expect(out[0].end_frame).toBe(170);
  });

  it("clamps moves to the timeline", () => {
    expect(applyDrag(edits, 0, "move", 0, 50, 240)[0].start_frame).toBe(0);
    const out = applyDrag(edits, 0, "move", 500, 0, 240)[0];
    expect(out.end_frame).toBe(240);
    expect(out.end_frame - out.start_frame).toBe(120);
  });

  it("resizes the start edge without collapsing the edit", () => {
    expect(applyDrag(edits, 0, "resize-start", 40, 0, 240)[0].start_frame).toBe(40);
    expect(applyDrag(edits, 0, "resize-start", 300, 0, 240)[0].start_frame).toBe(149);
    expect(applyDrag(edits, 0, "resize-start", -20, 0, 240)[0].start_frame).toBe(0);
  });

  it("resizes the end edge within bounds", () => {
    expect(applyDrag(edits, 0, "resize-end", 200, 0, 240)[0].end_frame).toBe(200);
    expect(applyDrag(edits, 0, "resize-end", 999, 0, 240)[0].end_frame).toBe(240);
    expect(applyDrag(edits, 0, "resize-end", 0, 0, 240)[0].end_frame).toBe(31);
  });

  it("does not mutate its input", () => {
    applyDrag(edits, 0, "move", 100, 0, 240);
    expect(edits[0].start_frame).toBe(30);
  });
});

describe("cursorForFrame", () => {
  const project: Project = { schema_version: 1, n_frames: 240, fps: 30, edits };
  const trajectory: TrajectoryPayload = {
    edits: [{ edit: 0, va: Array.from({ length: 120 }, (_, i) => [i / 120, 0.5] as [number, number]) }],
  };

  it("returns the VA sample under the playhead inside an edit", () => {
    const c = cursorForFrame(project, trajectory, 40);
    expect(c).not.toBeNull();
    expect(c!.edit).toBe(0);
    expect(c!.valence).toBeCloseTo(10 / 120, 12);
    expect(c!.arousal).toBe(0.5);
  });

  it("moves with the playhead", () => {
    const a = cursorForFrame(project, trajectory, 40)!;
    const b = cursorForFrame(project, trajectory, 41)!;
    expect(b.valence).toBeGreaterThan(a.valence);
  });

  it("is null outside every edit (half-open interval)", () => {
    expect(cursorForFrame(project, trajectory, 29)).toBeNull();
    expect(cursorForFrame(project, trajectory, 150)).toBeNull();
    expect(cursorForFrame(project, trajectory, 149)).not.toBeNull();
  });
});
