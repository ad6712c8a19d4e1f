import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { FrameCache, PlaybackClock } from "../src/playback";

describe("PlaybackClock", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("advances one frame per tick at the configured fps", () => {
    const clock = new PlaybackClock(100, 25);
    const seen: number[] = [];
    clock.onFrame((f) => seen.push(f));
    clock.play();
    vi.advanceTimersByTime(40 * 3); // 25 fps -> 40 ms per frame
    expect(seen).toEqual([1, 2, 3]);
    clock.pause();
  });

  it("wraps at the end of the timeline", () => {
    const clock = new PlaybackClock(4, 25);
    clock.seek(3);
    clock.play();
    vi.advanceTimersByTime(40);
    expect(clock.currentFrame).toBe(0);
    clock.pause();
  });

  it("stops advancing when paused", () => {
    const clock = new PlaybackClock(100, 25);
    clock.play();
    vi.advanceTimersByTime(40);
    clock.pause();
    vi.advanceTimersByTime(400);
    expect(clock.currentFrame).toBe(1);
  });

  it("clamps seeks into range", () => {
    const clock = new PlaybackClock(10, 25);
    clock.seek(-5);
    expect(clock.currentFrame).toBe(0);
    clock.seek(99);
    expect(clock.currentFrame).toBe(9);
  });
});

describe("FrameCache", () => {
  it("evicts the least recently used entry", () => {
    const cache = new FrameCache<number>(2);
    cache.set("a", 1);
    cache.set("b", 2);
    cache.get("a"); // refresh a
    cache.set("c", 3); // evicts b
    expect(cache.get("a")).toBe(1);
    expect(cache.get("b")).toBeUndefined();
    expect(cache.get("c")).toBe(3);
  });

  it("clears completely", () => {
    const cache = new FrameCache<number>(4);
    cache.set("a", 1);
    cache.clear();
    expect(cache.get("a")).toBeUndefined();
  });
});
