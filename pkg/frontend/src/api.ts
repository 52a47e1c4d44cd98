// Typed client for the session service HTTP API. The UI is a thin client:
// it never samples outcomes or computes beliefs, and it never receives
// latent on-time rates before session completion.

export interface SessionInfo {
  session_id: string
  k: number
  m: number
  t: number
  airline_names: string[]
}

export interface SessionState {
  route: number
  flight: number
  totals: { on_time: number; points: number }
  done: boolean
}

export interface ChoiceResult {
  outcome: 0 | 1
  points_after: number
  next: { route: number; flight: number } | null
}

export interface SessionLogRow {
  m: number
  t: number
  airline: number
  outcome: 0 | 1
  points_after: number
  reaction_time_ms: number | null
  wall_clock: string | null
}

export interface SessionLog {
  header: { version: number; env: unknown; rates: number[][] }
  rows: SessionLogRow[]
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(`${status}: ${message}`)
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init)
  if (!res.ok) {
    let detail = res.statusText
    try {
      const body = await res.json()
      if (body && body.detail) detail = String(body.detail)
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail)
  }
  return res.json() as Promise<T>
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  createSession(opts: { condition?: string; seed?: number } = {}): Promise<SessionInfo> {
    return request<SessionInfo>(`${this.baseUrl}/sessions`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ condition: 'FarLow', subject: 'human', ...opts }),
    })
  }

  getState(sessionId: string): Promise<SessionState> {
    return request<SessionState>(`${this.baseUrl}/sessions/${sessionId}/state`)
  }

  postChoice(
    sessionId: string,
    airline: number,
    reactionTimeMs?: number,
  ): Promise<ChoiceResult> {
    return request<ChoiceResult>(`${this.baseUrl}/sessions/${sessionId}/choice`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ airline, reaction_time_ms: reactionTimeMs ?? null }),
    })
  }

  getLog(sessionId: string): Promise<SessionLog> {
    return request<SessionLog>(`${this.baseUrl}/sessions/${sessionId}/log`)
  }
}
