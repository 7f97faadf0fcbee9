// Thin typed client for the annotation service HTTP API.

export interface SessionResult {
  ok: boolean;
  resumed: boolean;
  assignedCount: number;
  error?: string;
}

export interface NextItem {
  done: boolean;
  audioId: string | null;
  completed: number;
  total: number;
}

export interface ApiClient {
  createSession(annotatorId: string, condition: string): Promise<SessionResult>;
  nextItem(annotatorId: string): Promise<NextItem>;
  audioUrl(annotatorId: string, audioId: string): string;
  submitTranscription(annotatorId: string, audioId: string, text: string): Promise<void>;
  listConditions(): Promise<string[]>;
}

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<any> }>;

async function errorMessage(resp: { json(): Promise<any> }, fallback: string): Promise<string> {
  try {
    const body = await resp.json();
    return typeof body?.error === "string" ? body.error : fallback;
  } catch {
    return fallback;
  }
}

export function makeApi(fetchFn: FetchLike, base = ""): ApiClient {
  return {
    async createSession(annotatorId, condition) {
      const resp = await fetchFn(`${base}/api/session`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ annotator_id: annotatorId, condition }),
      });
      if (resp.status === 200) {
        const body = await resp.json();
        return { ok: true, resumed: false, assignedCount: body.assigned_count ?? 0 };
      }
      if (resp.status === 409) {
        // annotator already has a session; the caller resumes it
        return { ok: true, resumed: true, assignedCount: 0 };
      }
      return {
        ok: false,
        resumed: false,
        assignedCount: 0,
        error: await errorMessage(resp, `session request failed (${resp.status})`),
      };
    },

    async nextItem(annotatorId) {
      const resp = await fetchFn(`${base}/api/next?annotator=${encodeURIComponent(annotatorId)}`);
      if (resp.status !== 200) {
        throw new Error(await errorMessage(resp, `next request failed (${resp.status})`));
      }
      const body = await resp.json();
      return {
        done: Boolean(body.done),
        audioId: body.audio_id ?? null,
        completed: body.completed ?? 0,
        total: body.total ?? 0,
      };
    },

    audioUrl(annotatorId, audioId) {
      return `${base}/api/audio/${encodeURIComponent(audioId)}?annotator=${encodeURIComponent(annotatorId)}`;
    },

    async submitTranscription(annotatorId, audioId, text) {
      const resp = await fetchFn(`${base}/api/transcription`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ annotator_id: annotatorId, audio_id: audioId, text }),
      });
      if (resp.status !== 204) {
        throw new Error(await errorMessage(resp, `submit failed (${resp.status})`));
      }
    },

    async listConditions() {
      const resp = await fetchFn(`${base}/api/conditions`);
      if (resp.status !== 200) {
        return [];
      }
      const body = await resp.json();
      return Array.isArray(body.conditions) ? body.conditions : [];
    },
  };
}
