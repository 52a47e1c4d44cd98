// Session state machine driving one participant session. All task state is
// server-authoritative; this class only tracks the current view, measures
// reaction times from screen render to choice, and enforces the feedback
// pause between flights.

import { ApiClient, ChoiceResult, SessionInfo } from './api.js'

export type Phase = 'choosing' | 'feedback' | 'done'

export interface SessionView {
  phase: Phase
  route: number
  flight: number
  routeCount: number
  flightCount: number
  onTime: number
  points: number
  lastOutcome: 0 | 1 | null
  airlineNames: string[]
}

export const FEEDBACK_MS = 600
export const POINTS_PER_ON_TIME = 10
export const BONUS_PER_ON_TIME = 0.005

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms))

export class SessionDriver {
  private info!: SessionInfo
  private view!: SessionView
  private renderedAt = 0
  private listeners: Array<(v: SessionView) => void> = []

  constructor(
    private api: ApiClient,
    private opts: { condition?: string; seed?: number; feedbackMs?: number } = {},
    private now: () => number = () => performance.now(),
  ) {}

  async start(): Promise<SessionView> {
    this.info = await this.api.createSession({
      condition: this.opts.condition,
      seed: this.opts.seed,
    })
    const state = await this.api.getState(this.info.session_id)
    this.view = {
      phase: state.done ? 'done' : 'choosing',
      route: state.route,
      flight: state.flight,
      routeCount: this.info.m,
      flightCount: this.info.t,
      onTime: state.totals.on_time,
      points: state.totals.points,
      lastOutcome: null,
      airlineNames: this.info.airline_names,
    }
    this.markRendered()
    this.emit()
    return this.view
  }

  get sessionId(): string {
    return this.info.session_id
  }

  get current(): SessionView {
    return this.view
  }

  get bonusDollars(): number {
    return this.view.onTime * BONUS_PER_ON_TIME
  }

  onChange(fn: (v: SessionView) => void): void {
    this.listeners.push(fn)
  }

  // Called by the UI when the choice screen becomes visible; reaction time
  // is measured from this instant to the choice.
  markRendered(): void {
    this.renderedAt = this.now()
  }

  async choose(airline: number): Promise<ChoiceResult> {
    if (this.view.phase !== 'choosing') {
      throw new Error(`cannot choose during phase ${this.view.phase}`)
    }
    const reaction = Math.max(0, this.now() - this.renderedAt)
    const result = await this.api.postChoice(this.sessionId, airline, reaction)
    this.view = {
      ...this.view,
      phase: 'feedback',
      onTime: this.view.onTime + result.outcome,
      points: result.points_after,
      lastOutcome: result.outcome,
    }
    this.emit()
    await sleep(this.opts.feedbackMs ?? FEEDBACK_MS)
    if (result.next === null) {
      this.view = { ...this.view, phase: 'done' }
    } else {
      this.view = {
        ...this.view,
        phase: 'choosing',
        route: result.next.route,
        flight: result.next.flight,
      }
      this.markRendered()
    }
    this.emit()
    return result
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.view)
  }
}
