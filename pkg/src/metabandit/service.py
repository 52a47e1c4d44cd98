"""HTTP session service hosting live experiment sessions.

Clients (the browser UI or bot drivers) create a session, poll its state,
and submit one airline choice per flight; the server samples each outcome
from the hidden latent rates and keeps the points ledger.  Latent rates and
hyper-prior parameters never appear in any response until the session is
complete.  When a data directory is configured, every session is flushed to
a JSON-lines log after each flight and replayed into memory on restart.
"""

from __future__ import annotations

import datetime as dt
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .beliefs import build_hypothesis_grid
from .data_io import (FlightRow, SessionLog, append_flight_row,
                      read_session_log, write_session_log)
from .dp import EpsGreedy, Softmax
from .env import (AIRLINE_NAMES, ConditionSpec, Environment, EnvironmentSpec,
                  spec_from_condition)
from .policies import PolicySpec
from .simulate import POINTS_PER_ON_TIME, run_batch

DEFAULT_ROUTES = 10
DEFAULT_FLIGHTS = 10
DEFAULT_MEAN_GRID = (0.2, 0.4, 0.5, 0.6, 0.8)


class CreateSessionRequest(BaseModel):
    condition: str = "FarLow"
    subject: str = "human"
    seed: Optional[int] = None
    routes: int = DEFAULT_ROUTES
    flights: int = DEFAULT_FLIGHTS
    # bot-only planner settings
    policy: str = "metadp"
    rule: str = "eps:0.1"
    num_draws: Optional[int] = None


class ChoiceRequest(BaseModel):
    airline: int
    reaction_time_ms: Optional[float] = None
    # optional client-side cursor; a mismatch is rejected as out of turn
    route: Optional[int] = None
    flight: Optional[int] = None


@dataclass
class LiveSession:
    id: str
    env: Environment
    subject: str
    rows: list[FlightRow] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    log_path: Optional[Path] = None

    @property
    def spec(self) -> EnvironmentSpec:
        return self.env.spec

    @property
    def total_flights(self) -> int:
        return self.spec.num_routes * self.spec.flights_per_route

    @property
    def done(self) -> bool:
        return len(self.rows) >= self.total_flights

    def cursor(self) -> tuple[int, int]:
        """(route, flight) of the next choice, 1-based."""
        n = len(self.rows)
        T = self.spec.flights_per_route
        return n // T + 1, n % T + 1

    @property
    def on_time(self) -> int:
        return sum(r.outcome for r in self.rows)

    @property
    def points(self) -> int:
        return self.rows[-1].points_after if self.rows else 0

    def state_payload(self) -> dict:
        m, t = self.cursor() if not self.done else (self.spec.num_routes,
                                                    self.spec.flights_per_route)
        return {
            "route": m, "flight": t,
            "totals": {"on_time": self.on_time, "points": self.points},
            "done": self.done,
        }

    def to_log(self) -> SessionLog:
        import numpy as np
        rates = np.array([self.env.rates(m).rates
                          for m in range(1, self.spec.num_routes + 1)])
        return SessionLog(spec=self.spec, rates=rates, rows=list(self.rows))


def _parse_rule(text: str):
    kind, _, value = text.partition(":")
    if kind == "eps":
        return EpsGreedy(float(value))
    if kind == "softmax":
        return Softmax(float(value))
    raise ValueError(f"unknown decision rule {text!r}")


def _autoplay(session: LiveSession, req: CreateSessionRequest) -> None:
    """Play a bot session to completion with the requested planner."""
    spec = session.spec
    policy = PolicySpec(kind=req.policy, rule=_parse_rule(req.rule),
                        num_draws=req.num_draws)
    if req.policy == "dp":
        cls = build_hypothesis_grid((0.5,), spec.num_airlines)
    else:
        cls = build_hypothesis_grid(DEFAULT_MEAN_GRID, spec.num_airlines)
    record = run_batch(spec, policy, cls, n_runs=1,
                       base_seed=spec.rng_seed,
                       pinned_rates=session.env.route_rates)[0]
    points = 0
    for fl in record.flights:
        points += POINTS_PER_ON_TIME * fl.outcome
        session.rows.append(FlightRow(
            route=fl.route, flight=fl.flight, airline=fl.airline,
            outcome=fl.outcome, points_after=points,
            wall_clock=_now_rfc3339()))


def _now_rfc3339() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


def create_app(data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="flight-choice session service")
    sessions: dict[str, LiveSession] = {}
    data_path = Path(data_dir) if data_dir else None

    def _replay_logs() -> None:
        if data_path is None or not data_path.is_dir():
            return
        for path in sorted(data_path.glob("*.jsonl")):
            try:
                log = read_session_log(path)
            except (ValueError, KeyError):
                continue
            env = Environment(log.spec, rates=log.route_rates_list())
            sessions[path.stem] = LiveSession(
                id=path.stem, env=env, subject="human",
                rows=list(log.rows), log_path=path)

    _replay_logs()

    def _get(session_id: str) -> LiveSession:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, "unknown session")
        return session

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        if req.subject not in ("human", "bot"):
            raise HTTPException(422, "subject must be 'human' or 'bot'")
        try:
            cond = ConditionSpec.named(req.condition)
        except KeyError as exc:
            raise HTTPException(422, str(exc)) from exc
        seed = req.seed if req.seed is not None else uuid.uuid4().int % 2**63
        spec = spec_from_condition(cond, req.routes, req.flights, seed)
        session = LiveSession(id=uuid.uuid4().hex, env=Environment(spec),
                              subject=req.subject)
        if req.subject == "bot":
            try:
                _autoplay(session, req)
            except ValueError as exc:
                raise HTTPException(422, str(exc)) from exc
        if data_path is not None:
            data_path.mkdir(parents=True, exist_ok=True)
            session.log_path = data_path / f"{session.id}.jsonl"
            write_session_log(session.log_path, session.to_log())
        sessions[session.id] = session
        names = (AIRLINE_NAMES if spec.num_airlines == len(AIRLINE_NAMES)
                 else tuple(f"Airline {i + 1}" for i in range(spec.num_airlines)))
        return {
            "session_id": session.id,
            "k": spec.num_airlines,
            "m": spec.num_routes,
            "t": spec.flights_per_route,
            "airline_names": list(names),
        }

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return _get(session_id).state_payload()

    @app.post("/sessions/{session_id}/choice")
    def post_choice(session_id: str, req: ChoiceRequest):
        session = _get(session_id)
        with session.lock:
            if session.done:
                raise HTTPException(410, "session already completed")
            m, t = session.cursor()
            if req.route is not None and (req.route, req.flight) != (m, t):
                raise HTTPException(
                    409, f"out of turn: cursor is route {m} flight {t}")
            if not 0 <= req.airline < session.spec.num_airlines:
                raise HTTPException(422, "airline index out of range")
            outcome = session.env.outcome(m, t, req.airline)
            points = session.points + POINTS_PER_ON_TIME * outcome
            row = FlightRow(route=m, flight=t, airline=req.airline,
                            outcome=outcome, points_after=points,
                            reaction_time_ms=req.reaction_time_ms,
                            wall_clock=_now_rfc3339())
            session.rows.append(row)
            if session.log_path is not None:
                append_flight_row(session.log_path, row)
            nxt = None if session.done else dict(
                zip(("route", "flight"), session.cursor()))
            return {"outcome": outcome, "points_after": points, "next": nxt}

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str):
        session = _get(session_id)
        if not session.done:
            raise HTTPException(409, "session not yet completed")
        log = session.to_log()
        return {
            "header": log.header_json(),
            "rows": [r.to_json() for r in log.rows],
        }

    return app


def default_app() -> FastAPI:
    """App configured from the environment (listen address handled by the
    CLI; METABANDIT_DATA_DIR selects the session log directory)."""
    return create_app(os.environ.get("METABANDIT_DATA_DIR"))
