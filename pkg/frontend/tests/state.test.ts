import { describe, expect, it } from "vitest";

import type { TrialPayload } from "../src/api";
import {
  ALLOWED_JUDGMENT_KEYS,
  SessionCache,
  TrialSelection,
  leakedKeys,
  screenFor,
} from "../src/state";

const IDS = ["s1", "s2", "s3", "s4"];

describe("TrialSelection", () => {
  it("requires four stimuli", () => {
    expect(() => new TrialSelection(["a", "b"])).toThrow();
  });

  it("blocks submission until both choices are made", () => {
    const sel = new TrialSelection(IDS);
    expect(sel.canSubmit()).toBe(false);
    expect(sel.blockReason()).toBe("need_both");
    sel.chooseBest(0);
    expect(sel.canSubmit()).toBe(false);
    sel.chooseWorst(3);
    expect(sel.canSubmit()).toBe(true);
    expect(sel.blockReason()).toBeNull();
  });

  it("rejects choosing the same slot for best and worst", () => {
    const sel = new TrialSelection(IDS);
    expect(sel.chooseBest(1)).toBe(true);
    expect(sel.chooseWorst(1)).toBe(false);
    expect(sel.worst).toBeNull();
    expect(sel.canSubmit()).toBe(false);
  });

  it("rejects best onto the current worst slot", () => {
    const sel = new TrialSelection(IDS);
    sel.chooseWorst(2);
    expect(sel.chooseBest(2)).toBe(false);
    expect(sel.best).toBeNull();
  });

  it("keeps selections revisable until submit", () => {
    const sel = new TrialSelection(IDS);
    sel.chooseBest(0);
    sel.chooseWorst(1);
    expect(sel.chooseBest(2)).toBe(true);
    expect(sel.bestId()).toBe("s3");
    expect(sel.chooseWorst(0)).toBe(true);
    expect(sel.worstId()).toBe("s1");
    expect(sel.canSubmit()).toBe(true);
  });

  it("counts unlimited replays per slot", () => {
    const sel = new TrialSelection(IDS);
    for (let i = 0; i < 17; i++) sel.registerPlay(2);
    sel.registerPlay(0);
    expect(sel.playCounts).toEqual([1, 0, 17, 0]);
  });

  it("measures response time from construction", () => {
    let t = 1_000;
    const sel = new TrialSelection(IDS, () => t);
    t = 5_432;
    expect(sel.responseTimeMs(() => t)).toBe(4_432);
  });

  it("rejects out-of-range slots", () => {
    const sel = new TrialSelection(IDS);
    expect(() => sel.chooseBest(4)).toThrow();
    expect(() => sel.registerPlay(-1)).toThrow();
  });
});

describe("screen routing", () => {
  it("maps payload kinds to screens", () => {
    const judgment = {
      kind: "judgment",
      participant_id: 1,
      trial_index: 0,
      n_trials: 41,
      stimulus_ids: IDS,
      audio_urls: IDS.map((s) => `/audio/${s}`),
    } as TrialPayload;
    expect(screenFor(judgment)).toBe("trial");
    expect(screenFor({ kind: "ready_to_finish", participant_id: 1 })).toBe("finish");
    expect(screenFor({ kind: "done", participant_id: 1 })).toBe("done");
  });
});

describe("phase leakage guard", () => {
  it("accepts clean judgment payloads", () => {
    const payload = {
      kind: "judgment",
      participant_id: 1,
      trial_index: 3,
      n_trials: 41,
      stimulus_ids: IDS,
      audio_urls: ["/audio/s1"],
    };
    expect(leakedKeys(payload)).toEqual([]);
  });

  it("flags phase-revealing fields", () => {
    const payload = {
      kind: "judgment",
      participant_id: 1,
      trial_index: 3,
      phase: "retest",
      recorded: true,
    };
    expect(leakedKeys(payload).sort()).toEqual(["phase", "recorded"]);
  });

  it("never allows phase words in the allowed key set", () => {
    for (const key of ALLOWED_JUDGMENT_KEYS) {
      expect(key).not.toMatch(/phase|retest|training|recorded/i);
    }
  });
});

describe("DOM sources never mention phases", () => {
  it("keeps training/retest vocabulary out of the markup and labels", async () => {
    const { readFileSync } = await import("node:fs");
    const { join } = await import("node:path");
    for (const file of ["../index.html", "../src/strings.ts", "../src/main.ts"]) {
      const text = readFileSync(join(__dirname, file), "utf-8");
      expect(text).not.toMatch(/retest|training|entra[îi]nement|phase/i);
    }
  });
});

describe("SessionCache", () => {
  function memoryStorage() {
    const data = new Map<string, string>();
    return {
      getItem: (k: string) => data.get(k) ?? null,
      setItem: (k: string, v: string) => void data.set(k, v),
      removeItem: (k: string) => void data.delete(k),
    };
  }

  it("round-trips the recovery state", () => {
    const cache = new SessionCache(memoryStorage());
    expect(cache.load()).toBeNull();
    cache.save({ participantId: 3, trialIndex: 12, best: 1, worst: 2 });
    expect(cache.load()).toEqual({ participantId: 3, trialIndex: 12, best: 1, worst: 2 });
    cache.clear();
    expect(cache.load()).toBeNull();
  });

  it("treats corrupt cache entries as absent", () => {
    const storage = memoryStorage();
    storage.setItem("maskmix.session", "{not json");
    expect(new SessionCache(storage).load()).toBeNull();
  });
});
