/** Typed client for the experiment service.
 *
 * Network failures are retried with backoff; submissions are safe to retry
 * because the server acknowledges exact duplicates idempotently. HTTP error
 * statuses are surfaced as ApiError and never retried blindly.
 */

export interface JudgmentPayload {
  kind: "judgment";
  participant_id: number;
  trial_index: number;
  n_trials: number;
  stimulus_ids: string[];
  audio_urls: string[];
}

export interface VerbalizationPayload {
  kind: "verbalization";
  participant_id: number;
  verbalization_index: number;
  n_verbalizations: number;
  positive_id: string;
  audio_url: string;
}

export interface ReadyToFinishPayload {
  kind: "ready_to_finish";
  participant_id: number;
}

export interface DonePayload {
  kind: "done";
  participant_id: number;
}

export type TrialPayload =
  | JudgmentPayload
  | VerbalizationPayload
  | ReadyToFinishPayload
  | DonePayload;

export interface SessionCreated {
  participant_id: number;
  trial: TrialPayload;
}

export interface JudgmentRequest {
  trial_index: number;
  best_id: string;
  worst_id: string;
  response_time_ms: number | null;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    private readonly retries: number = 3,
    private readonly retryDelayMs: number = 500,
    readonly onRetry: (attempt: number) => void = () => {},
  ) {}

  audioUrl(path: string): string {
    return this.baseUrl + path;
  }

  createSession(): Promise<SessionCreated> {
    return this.request("/session", { method: "POST" });
  }

  getTrial(participantId: number): Promise<TrialPayload> {
    return this.request(`/session/${participantId}/trial`, { method: "GET" });
  }

  async submitJudgment(
    participantId: number,
    body: JudgmentRequest,
  ): Promise<TrialPayload> {
    const ack = await this.request<{ next: TrialPayload }>(
      `/session/${participantId}/judgment`,
      { method: "POST", body: JSON.stringify(body) },
    );
    return ack.next;
  }

  async submitVerbalization(
    participantId: number,
    positiveId: string,
    text: string,
  ): Promise<TrialPayload> {
    const ack = await this.request<{ next: TrialPayload }>(
      `/session/${participantId}/verbalization`,
      { method: "POST", body: JSON.stringify({ positive_id: positiveId, text }) },
    );
    return ack.next;
  }

  finish(participantId: number): Promise<{ results_file: string }> {
    return this.request(`/session/${participantId}/finish`, { method: "POST" });
  }

  private async request<T>(path: string, init: RequestInit): Promise<T> {
    let lastError: unknown = null;
    for (let attempt = 0; attempt <= this.retries; attempt++) {
      if (attempt > 0) {
        this.onRetry(attempt);
        await sleep(this.retryDelayMs * attempt);
      }
      let response: Response;
      try {
        response = await this.fetchFn(this.baseUrl + path, {
          ...init,
          headers: { "Content-Type": "application/json" },
        });
      } catch (error) {
        lastError = error; // network failure: retry, state lives on the server
        continue;
      }
      if (!response.ok) {
        const detail = await response
          .json()
          .then((body: { detail?: string }) => body.detail ?? response.statusText)
          .catch(() => response.statusText);
        throw new ApiError(response.status, detail);
      }
      return (await response.json()) as T;
    }
    throw lastError instanceof Error ? lastError : new Error(String(lastError));
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
