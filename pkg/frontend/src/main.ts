/** DOM wiring for the participant flow: start screen, 4-tuple judgment
 * trials, verbalization screens, finish. All experiment state of record
 * lives on the server; the client only keeps the current selections plus a
 * crash-recovery cache. */

import { ApiClient, ApiError, type JudgmentPayload, type TrialPayload, type VerbalizationPayload } from "./api.js";
import { SinglePlayer } from "./player.js";
import { SessionCache, TrialSelection, screenFor } from "./state.js";
import { STRINGS } from "./strings.js";

const api = new ApiClient("", undefined, 4, 600, () => setStatus(STRINGS.networkRetry));
const cache = new SessionCache(window.localStorage);
const player = new SinglePlayer(
  // HTMLAudioElement satisfies Playable at runtime; its DOM onended
  // signature is just wider than the zero-arg callback we install
  (url) => new Audio(url) as unknown as import("./player.js").Playable,
  (playing) => updatePlayButtons(playing),
);

let participantId: number | null = null;
let selection: TrialSelection | null = null;
let currentTrial: JudgmentPayload | null = null;
let currentVerbalization: VerbalizationPayload | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(message: string): void {
  el<HTMLParagraphElement>("status").textContent = message;
}

function showScreen(name: string): void {
  for (const screen of document.querySelectorAll<HTMLElement>("[data-screen]")) {
    screen.hidden = screen.dataset.screen !== name;
  }
  setStatus("");
}

function updatePlayButtons(playing: string | null): void {
  for (const button of document.querySelectorAll<HTMLButtonElement>("[data-play-key]")) {
    button.textContent = button.dataset.playKey === playing ? STRINGS.stop : STRINGS.play;
  }
}

async function guard<T>(work: () => Promise<T>): Promise<T | null> {
  try {
    return await work();
  } catch (error) {
    if (error instanceof ApiError) {
      setStatus(error.detail);
    } else {
      setStatus(STRINGS.networkError);
    }
    return null;
  }
}

function applyPayload(payload: TrialPayload): void {
  player.stop();
  const screen = screenFor(payload);
  if (payload.kind === "judgment") {
    renderTrial(payload);
  } else if (payload.kind === "verbalization") {
    renderVerbalization(payload);
  }
  showScreen(screen);
}

function renderTrial(payload: JudgmentPayload): void {
  currentTrial = payload;
  selection = new TrialSelection(payload.stimulus_ids);
  if (participantId !== null) {
    cache.save({
      participantId,
      trialIndex: payload.trial_index,
      best: null,
      worst: null,
    });
  }
  el<HTMLHeadingElement>("trial-progress").textContent = STRINGS.trialProgress(
    payload.trial_index + 1,
    payload.n_trials,
  );
  const table = el<HTMLDivElement>("sequences");
  table.innerHTML = "";
  payload.stimulus_ids.forEach((_, slot) => {
    const row = document.createElement("div");
    row.className = "sequence-row";

    const label = document.createElement("span");
    label.className = "sequence-label";
    label.textContent = STRINGS.sequenceLabel(slot);
    row.appendChild(label);

    const playButton = document.createElement("button");
    playButton.type = "button";
    playButton.dataset.playKey = String(slot);
    playButton.textContent = STRINGS.play;
    playButton.addEventListener("click", () => {
      if (player.playing() === String(slot)) {
        player.stop();
      } else {
        selection?.registerPlay(slot);
        player.play(String(slot), api.audioUrl(payload.audio_urls[slot]));
      }
    });
    row.appendChild(playButton);

    row.appendChild(choiceRadio("best", slot));
    row.appendChild(choiceRadio("worst", slot));
    table.appendChild(row);
  });
  el<HTMLParagraphElement>("trial-message").textContent = "";
}

function choiceRadio(kind: "best" | "worst", slot: number): HTMLLabelElement {
  const label = document.createElement("label");
  label.className = `choice choice-${kind}`;
  const input = document.createElement("input");
  input.type = "radio";
  input.name = kind;
  input.value = String(slot);
  input.addEventListener("change", () => {
    if (!selection) return;
    const accepted = kind === "best" ? selection.chooseBest(slot) : selection.chooseWorst(slot);
    if (!accepted) {
      input.checked = false;
      el<HTMLParagraphElement>("trial-message").textContent = STRINGS.needDistinctChoices;
      return;
    }
    el<HTMLParagraphElement>("trial-message").textContent = "";
    if (participantId !== null && currentTrial) {
      cache.save({
        participantId,
        trialIndex: currentTrial.trial_index,
        best: selection.best,
        worst: selection.worst,
      });
    }
  });
  label.appendChild(input);
  label.appendChild(document.createTextNode(kind === "best" ? STRINGS.best : STRINGS.worst));
  return label;
}

function renderVerbalization(payload: VerbalizationPayload): void {
  currentVerbalization = payload;
  el<HTMLHeadingElement>("verbalization-progress").textContent =
    STRINGS.verbalizationProgress(
      payload.verbalization_index + 1,
      payload.n_verbalizations,
    );
  const playButton = el<HTMLButtonElement>("verbalization-play");
  playButton.dataset.playKey = "verbalization";
  playButton.onclick = () => {
    if (player.playing() === "verbalization") {
      player.stop();
    } else {
      player.play("verbalization", api.audioUrl(payload.audio_url));
    }
  };
  el<HTMLTextAreaElement>("verbalization-text").value = "";
  el<HTMLParagraphElement>("verbalization-message").textContent = "";
}

async function start(): Promise<void> {
  const payload = await guard(async () => {
    const recovered = cache.load();
    if (recovered) {
      participantId = recovered.participantId;
      try {
        return await api.getTrial(participantId);
      } catch (error) {
        if (!(error instanceof ApiError && error.status === 404)) throw error;
        cache.clear(); // unknown session on the server: start fresh
      }
    }
    const created = await api.createSession();
    participantId = created.participant_id;
    cache.save({ participantId, trialIndex: null, best: null, worst: null });
    return created.trial;
  });
  if (payload) applyPayload(payload);
}

async function submitTrial(): Promise<void> {
  if (!selection || !currentTrial || participantId === null) return;
  const reason = selection.blockReason();
  if (reason) {
    el<HTMLParagraphElement>("trial-message").textContent =
      reason === "need_both" ? STRINGS.needBothChoices : STRINGS.needDistinctChoices;
    return;
  }
  const pid = participantId;
  const trial = currentTrial;
  const chosen = selection;
  const payload = await guard(() =>
    api.submitJudgment(pid, {
      trial_index: trial.trial_index,
      best_id: chosen.bestId(),
      worst_id: chosen.worstId(),
      response_time_ms: chosen.responseTimeMs(),
    }),
  );
  if (payload) applyPayload(payload);
}

async function submitVerbalization(): Promise<void> {
  if (!currentVerbalization || participantId === null) return;
  const text = el<HTMLTextAreaElement>("verbalization-text").value.trim();
  if (!text) {
    el<HTMLParagraphElement>("verbalization-message").textContent = STRINGS.needDescription;
    return;
  }
  const pid = participantId;
  const positive = currentVerbalization.positive_id;
  const payload = await guard(() => api.submitVerbalization(pid, positive, text));
  if (payload) applyPayload(payload);
}

async function finish(): Promise<void> {
  if (participantId === null) return;
  const pid = participantId;
  const result = await guard(() => api.finish(pid));
  if (result) {
    cache.clear();
    showScreen("done");
  }
}

function init(): void {
  document.title = STRINGS.appTitle;
  el<HTMLParagraphElement>("context-intro").textContent = STRINGS.contextIntro;
  el<HTMLParagraphElement>("instructions").textContent = STRINGS.instructions;
  el<HTMLParagraphElement>("volume-note").textContent = STRINGS.volumeNote;
  const startButton = el<HTMLButtonElement>("start-button");
  startButton.textContent = cache.load() ? STRINGS.resumeButton : STRINGS.startButton;
  startButton.addEventListener("click", () => void start());
  el<HTMLButtonElement>("trial-submit").textContent = STRINGS.submitTrial;
  el<HTMLButtonElement>("trial-submit").addEventListener("click", () => void submitTrial());
  el<HTMLHeadingElement>("verbalization-title").textContent = STRINGS.verbalizationTitle;
  el<HTMLParagraphElement>("verbalization-prompt").textContent = STRINGS.verbalizationPrompt;
  el<HTMLTextAreaElement>("verbalization-text").placeholder = STRINGS.verbalizationPlaceholder;
  el<HTMLButtonElement>("verbalization-play").textContent = STRINGS.play;
  el<HTMLButtonElement>("verbalization-submit").textContent = STRINGS.submitVerbalization;
  el<HTMLButtonElement>("verbalization-submit").addEventListener(
    "click",
    () => void submitVerbalization(),
  );
  el<HTMLHeadingElement>("finish-title").textContent = STRINGS.finishTitle;
  el<HTMLButtonElement>("finish-button").textContent = STRINGS.finishButton;
  el<HTMLButtonElement>("finish-button").addEventListener("click", () => void finish());
  el<HTMLHeadingElement>("done-title").textContent = STRINGS.doneTitle;
  el<HTMLParagraphElement>("done-body").textContent = STRINGS.doneBody;
  showScreen("start");
}

document.addEventListener("DOMContentLoaded", init);
