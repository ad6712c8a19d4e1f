import { describe, expect, it } from "vitest";
import type { Edit } from "../src/types";
import { validateEdits } from "../src/validation";

const edit = (over: Partial<Edit> = {}): Edit => ({
  start_frame: 10,
  end_frame: 20,
  label: "happy",
  intensity: "medium",
  seed: 1,
  ...over,
});

describe("validateEdits", () => {
  it("accepts a clean edit list", () => {
    expect(validateEdits([edit()], 100)).toEqual([]);
  });

  it("flags unknown labels", () => {
    const v = validateEdits([edit({ label: "angry" as Edit["label"] })], 100);
    expect(v.map((x) => x.code)).toEqual(["bad_label"]);
  });

  it("rejects intensity on neutral", () => {
    const v = validateEdits([edit({ label: "neutral" })], 100);
    expect(v.map((x) => x.code)).toEqual(["neutral_intensity"]);
  });

  it("requires intensity on emotional labels", () => {
    const v = validateEdits([edit({ intensity: undefined })], 100);
    expect(v.map((x) => x.code)).toEqual(["missing_intensity"]);
  });

  it("allows neutral without intensity", () => {
    expect(validateEdits([edit({ label: "neutral", intensity: undefined })], 100)).toEqual([]);
  });

  it("rejects bad intervals", () => {
    const cases: Edit[] = [
      edit({ start_frame: -1 }),
      edit({ end_frame: 101 }),
      edit({ start_frame: 20, end_frame: 20 }),
      edit({ start_frame: 1.5 }),
    ];
    for (const e of cases) {
      expect(validateEdits([e], 100).map((x) => x.code)).toEqual(["bad_interval"]);
    }
  });

  it("detects overlap between sorted neighbours", () => {
    const v = validateEdits(
      [edit({ start_frame: 40, end_frame: 60 }), edit({ start_frame: 50, end_frame: 70 })],
      100,
    );
    expect(v).toHaveLength(1);
    expect(v[0].code).toBe("overlap");
    expect(v[0].edits).toEqual([0, 1]);
  });

  it("allows touching half-open intervals", () => {
    const v = validateEdits(
      [edit({ start_frame: 10, end_frame: 20 }), edit({ start_frame: 20, end_frame: 30 })],
      100,
    );
    expect(v).toEqual([]);
  });
});
