/** Audio playback with a single active element: starting one stops the rest.
 * Playback stays at unit gain; the interface exposes no volume control. */

export interface Playable {
  play(): Promise<void> | void;
  pause(): void;
  currentTime: number;
  ended: boolean;
  onended: (() => void) | null;
}

export class SinglePlayer {
  private active: Playable | null = null;
  private activeKey: string | null = null;

  constructor(
    private readonly create: (url: string) => Playable,
    private readonly onStateChange: (playingKey: string | null) => void = () => {},
  ) {}

  /** Start (or restart) the clip for `key`; anything else stops. */
  play(key: string, url: string): void {
    this.stop();
    const element = this.create(url);
    element.onended = () => {
      if (this.activeKey === key) {
        this.active = null;
        this.activeKey = null;
        this.onStateChange(null);
      }
    };
    this.active = element;
    this.activeKey = key;
    void element.play();
    this.onStateChange(key);
  }

  stop(): void {
    if (this.active) {
      this.active.pause();
      this.active.currentTime = 0;
      this.active = null;
      this.activeKey = null;
      this.onStateChange(null);
    }
  }

  playing(): string | null {
    return this.activeKey;
  }
}
