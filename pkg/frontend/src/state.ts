/** Pure client-side state: per-trial selections and the session flow.
 *
 * Nothing here knows about the DOM or the network, so the rules that the
 * experiment depends on (distinct best/worst before advancing, unlimited
 * replays, revisable choices) are directly testable.
 */

import type { TrialPayload } from "./api.js";

export const TUPLE_SIZE = 4;

export type BlockReason = "need_both" | "need_distinct" | null;

/** Selections for one 4-tuple; slots are positions 0..3 in display order. */
export class TrialSelection {
  best: number | null = null;
  worst: number | null = null;
  readonly playCounts: number[];
  private readonly startedAt: number;

  constructor(readonly stimulusIds: string[], now: () => number = Date.now) {
    if (stimulusIds.length !== TUPLE_SIZE) {
      throw new Error(`expected ${TUPLE_SIZE} stimuli, got ${stimulusIds.length}`);
    }
    this.playCounts = stimulusIds.map(() => 0);
    this.startedAt = now();
  }

  registerPlay(slot: number): void {
    this.assertSlot(slot);
    this.playCounts[slot] += 1;
  }

  /** Choosing is always allowed and revisable; returns false only when the
   * choice would make best and worst coincide. */
  chooseBest(slot: number): boolean {
    this.assertSlot(slot);
    if (this.worst === slot) return false;
    this.best = slot;
    return true;
  }

  chooseWorst(slot: number): boolean {
    this.assertSlot(slot);
    if (this.best === slot) return false;
    this.worst = slot;
    return true;
  }

  blockReason(): BlockReason {
    if (this.best === null || this.worst === null) return "need_both";
    if (this.best === this.worst) return "need_distinct";
    return null;
  }

  canSubmit(): boolean {
    return this.blockReason() === null;
  }

  bestId(): string {
    if (this.best === null) throw new Error("no best selected");
    return this.stimulusIds[this.best];
  }

  worstId(): string {
    if (this.worst === null) throw new Error("no worst selected");
    return this.stimulusIds[this.worst];
  }

  responseTimeMs(now: () => number = Date.now): number {
    return Math.max(0, Math.round(now() - this.startedAt));
  }

  private assertSlot(slot: number): void {
    if (!Number.isInteger(slot) || slot < 0 || slot >= TUPLE_SIZE) {
      throw new Error(`slot out of range: ${slot}`);
    }
  }
}

export type Screen = "start" | "trial" | "verbalization" | "finish" | "done";

/** Maps server payloads to the screen the participant should see. */
export function screenFor(payload: TrialPayload): Screen {
  switch (payload.kind) {
    case "judgment":
      return "trial";
    case "verbalization":
      return "verbalization";
    case "ready_to_finish":
      return "finish";
    case "done":
      return "done";
  }
}

/** Keys a judgment payload is allowed to carry; anything else would leak
 * design internals (training/retest tagging) to the participant. */
export const ALLOWED_JUDGMENT_KEYS = new Set([
  "kind",
  "participant_id",
  "trial_index",
  "n_trials",
  "stimulus_ids",
  "audio_urls",
]);

export function leakedKeys(payload: Record<string, unknown>): string[] {
  return Object.keys(payload).filter(
    (key) => payload[key] !== null && !ALLOWED_JUDGMENT_KEYS.has(key),
  );
}

const STORAGE_KEY = "maskmix.session";

export interface RecoveryCache {
  participantId: number;
  trialIndex: number | null;
  best: number | null;
  worst: number | null;
}

interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

/** Crash-recovery cache: just enough to resume (the server owns all answers). */
export class SessionCache {
  constructor(private readonly storage: StorageLike) {}

  load(): RecoveryCache | null {
    const raw = this.storage.getItem(STORAGE_KEY);
    if (!raw) return null;
    try {
      return JSON.parse(raw) as RecoveryCache;
    } catch {
      return null;
    }
  }

  save(cache: RecoveryCache): void {
    this.storage.setItem(STORAGE_KEY, JSON.stringify(cache));
  }

  clear(): void {
    this.storage.removeItem(STORAGE_KEY);
  }
}
