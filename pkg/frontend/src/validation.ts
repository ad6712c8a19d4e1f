// Client-side mirror of the server's project validation, so most mistakes
// are flagged before a round trip.  The server remains authoritative.

import { EMOTION_LABELS, INTENSITIES, type Edit, type Violation } from "./types";

export function validateEdits(edits: Edit[], nFrames: number): Violation[] {
  const out: Violation[] = [];
  edits.forEach((e, i) => {
    if (!EMOTION_LABELS.includes(e.label)) {
      out.push({ code: "bad_label", message: `edit ${i}: unknown label "${e.label}"`, edits: [i] });
    } else if (e.label === "neutral" && e.intensity !== undefined) {
      out.push({
        code: "neutral_intensity",
        message: `edit ${i}: neutral admits no intensity`,
        edits: [i],
      });
    } else if (e.label !== "neutral" && !INTENSITIES.includes(e.intensity!)) {
      out.push({
        code: "missing_intensity",
        message: `edit ${i}: label "${e.label}" requires an intensity`,
        edits: [i],
      });
    }
    if (
      !(Number.isInteger(e.start_frame) && Number.isInteger(e.end_frame)) ||
      e.start_frame < 0 ||
      e.end_frame > nFrames ||
      e.start_frame >= e.end_frame
    ) {
      out.push({
        code: "bad_interval",
        message: `edit ${i}: interval [${e.start_frame}, ${e.end_frame}) invalid for ${nFrames} frames`,
        edits: [i],
      });
    }
  });
  const order = edits
    .map((e, i) => i)
    .sort((a, b) => edits[a].start_frame - edits[b].start_frame);
  for (let k = 0; k + 1 < order.length; k++) {
    const a = order[k];
    const b = order[k + 1];
    if (edits[b].start_frame < edits[a].end_frame) {
      out.push({
        code: "overlap",
        message: `edits ${a} and ${b} overlap`,
        edits: [a, b].sort((x, y) => x - y),
      });
    }
  }
  return out;
}
