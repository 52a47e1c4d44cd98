// Shared test helpers: an in-memory fake of the session service for unit
// tests, and a real-server launcher for the parity test.

import { spawn, ChildProcess } from 'node:child_process'

// Minimal deterministic fake: outcome is a fixed function of (route,
// flight, airline) so tests are reproducible without a server.
export function fakeFetch(routes = 2, flights = 3) {
  let cursor = 0
  let points = 0
  const total = routes * flights
  const outcomeOf = (m: number, t: number, airline: number): 0 | 1 =>
    ((m + t + airline) % 2) as 0 | 1

  const json = (body: unknown, status = 200) =>
    new Response(JSON.stringify(body), {
      status,
      headers: { 'Content-Type': 'application/json' },
    })

  const calls: Array<{ airline: number; reaction: number | null }> = []

  const impl = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input)
    if (url.endsWith('/sessions') && init?.method === 'POST') {
      return json({
        session_id: 'fake',
        k: 3,
        m: routes,
        t: flights,
        airline_names: ['Ascend', 'Summit', 'DynaAir'],
      })
    }
    if (url.endsWith('/state')) {
      return json({
        route: Math.floor(cursor / flights) + 1,
        flight: (cursor % flights) + 1,
        totals: { on_time: points / 10, points },
        done: cursor >= total,
      })
    }
    if (url.endsWith('/choice')) {
      if (cursor >= total) return json({ detail: 'completed' }, 410)
      const body = JSON.parse(String(init?.body))
      const m = Math.floor(cursor / flights) + 1
      const t = (cursor % flights) + 1
      const outcome = outcomeOf(m, t, body.airline)
      calls.push({ airline: body.airline, reaction: body.reaction_time_ms })
      cursor += 1
      points += 10 * outcome
      const done = cursor >= total
      return json({
        outcome,
        points_after: points,
        next: done
          ? null
          : { route: Math.floor(cursor / flights) + 1, flight: (cursor % flights) + 1 },
      })
    }
    return json({ detail: 'not found' }, 404)
  }

  return { impl, calls }
}

export interface LiveServer {
  baseUrl: string
  stop: () => void
}

// Starts the real Python session service on a free port and waits for it
// to accept requests. Skips gracefully if python3/uvicorn are unavailable.
export async function startServer(port: number): Promise<LiveServer> {
  const code =
    'from metabandit.service import create_app; import uvicorn; ' +
    `uvicorn.run(create_app(), host="127.0.0.1", port=${port}, log_level="error")`
  const proc: ChildProcess = spawn('python3', ['-c', code], { stdio: 'ignore' })
  const baseUrl = `http://127.0.0.1:${port}`
  const deadline = Date.now() + 20_000
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${baseUrl}/sessions/probe/state`)
      if (res.status === 404) return { baseUrl, stop: () => proc.kill() }
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150))
  }
  proc.kill()
  throw new Error('session service did not start within 20 s')
}
