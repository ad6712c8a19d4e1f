// Playback clock: advances the current frame at the project's fps using
// setInterval, wrapping at the end of the timeline.  Frame fetching and
// caching live elsewhere; this only owns time.

export type FrameListener = (frame: number) => void;

export class PlaybackClock {
  private frame = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  private listeners: FrameListener[] = [];

  constructor(
    public nFrames: number,
    public fps: number,
  ) {}

  get currentFrame(): number {
    return this.frame;
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  onFrame(fn: FrameListener): void {
    this.listeners.push(fn);
  }

  seek(frame: number): void {
    this.frame = clamp(Math.round(frame), 0, this.nFrames - 1);
    this.emit();
  }

  play(): void {
    if (this.timer !== null || this.nFrames <= 0) return;
    this.timer = setInterval(() => {
      this.frame = (this.frame + 1) % this.nFrames;
      this.emit();
    }, 1000 / this.fps);
  }

  pause(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  toggle(): void {
    this.playing ? this.pause() : this.play();
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.frame);
  }
}

/** Small LRU for decoded preview frames keyed by (pane, frame). */
export class FrameCache<T> {
  private map = new Map<string, T>();

  constructor(private capacity = 256) {}

  get(key: string): T | undefined {
    const v = this.map.get(key);
    if (v !== undefined) {
      this.map.delete(key);
      this.map.set(key, v);
    }
    return v;
  }

  set(key: string, value: T): void {
    this.map.delete(key);
    this.map.set(key, value);
    if (this.map.size > this.capacity) {
      const oldest = this.map.keys().next().value as string;
      this.map.delete(oldest);
    }
  }

  clear(): void {
    this.map.clear();
  }
}

function clamp(x: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, x));
}
