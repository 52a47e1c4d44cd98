"""Session persistence: JSON-lines logs with a header plus one flight row.

A log file starts with a header object describing the environment (including
the realized latent rate matrix, so a file is self-contained) followed by
one object per completed flight.  Logs written by simulation and by the HTTP
service share this format, and a partially written log can be replayed to
restore an in-progress session.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .env import EnvironmentSpec, RouteRates
from .simulate import POINTS_PER_ON_TIME, SessionRecord

LOG_VERSION = 1


@dataclass
class FlightRow:
    route: int                     # 1-based
    flight: int                    # 1-based
    airline: int                   # 0-based
    outcome: int                   # 1 on-time, 0 delayed
    points_after: int
    reaction_time_ms: float | None = None
    wall_clock: str | None = None  # RFC 3339 timestamp

    def to_json(self) -> dict:
        return {
            "m": self.route, "t": self.flight, "airline": self.airline,
            "outcome": self.outcome, "points_after": self.points_after,
            "reaction_time_ms": self.reaction_time_ms,
            "wall_clock": self.wall_clock,
        }

    @staticmethod
    def from_json(doc: dict) -> "FlightRow":
        return FlightRow(
            route=doc["m"], flight=doc["t"], airline=doc["airline"],
            outcome=doc["outcome"], points_after=doc["points_after"],
            reaction_time_ms=doc.get("reaction_time_ms"),
            wall_clock=doc.get("wall_clock"),
        )


@dataclass
class SessionLog:
    spec: EnvironmentSpec
    rates: np.ndarray              # (M, K)
    rows: list[FlightRow] = field(default_factory=list)

    def header_json(self) -> dict:
        return {
            "version": LOG_VERSION,
            "env": self.spec.to_json(),
            "rates": [list(map(float, r)) for r in self.rates],
        }

    def validate(self) -> None:
        """Check rows form a prefix of the session's flight order."""
        M, T = self.spec.num_routes, self.spec.flights_per_route
        for i, row in enumerate(self.rows):
            m_exp, t_exp = i // T + 1, i % T + 1
            if (row.route, row.flight) != (m_exp, t_exp):
                raise ValueError(
                    f"row {i} is route {row.route} flight {row.flight}; "
                    f"expected route {m_exp} flight {t_exp}")
            if not 0 <= row.airline < self.spec.num_airlines:
                raise ValueError(f"row {i} has invalid airline {row.airline}")
        if len(self.rows) > M * T:
            raise ValueError("more rows than flights in the session")

    @property
    def complete(self) -> bool:
        return len(self.rows) == self.spec.num_routes * self.spec.flights_per_route

    @property
    def points(self) -> int:
        return self.rows[-1].points_after if self.rows else 0

    def route_rates_list(self) -> list[RouteRates]:
        return [RouteRates(m + 1, tuple(map(float, r)))
                for m, r in enumerate(self.rates)]


def write_session_log(path, log: SessionLog) -> None:
    log.validate()
    path = Path(path)
    with path.open("w") as f:
        f.write(json.dumps(log.header_json()) + "\n")
        for row in log.rows:
            f.write(json.dumps(row.to_json()) + "\n")


def append_flight_row(path, row: FlightRow) -> None:
    """Append one row and flush, so a crash loses at most the current flight."""
    with Path(path).open("a") as f:
        f.write(json.dumps(row.to_json()) + "\n")
        f.flush()


def read_session_log(path) -> SessionLog:
    path = Path(path)
    with path.open() as f:
        lines = [line for line in f if line.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = json.loads(lines[0])
    if header.get("version") != LOG_VERSION:
        raise ValueError(f"unsupported log version {header.get('version')!r}")
    log = SessionLog(
        spec=EnvironmentSpec.from_json(header["env"]),
        rates=np.array(header["rates"], dtype=float),
        rows=[FlightRow.from_json(json.loads(line)) for line in lines[1:]],
    )
    log.validate()
    return log


def log_from_session(record: SessionRecord) -> SessionLog:
    """Convert a simulated session to the on-disk log structure."""
    rows, points = [], 0
    for fl in record.flights:
        points += POINTS_PER_ON_TIME * fl.outcome
        rows.append(FlightRow(route=fl.route, flight=fl.flight,
                              airline=fl.airline, outcome=fl.outcome,
                              points_after=points))
    return SessionLog(spec=record.spec, rates=np.asarray(record.rates), rows=rows)


def history_arrays(log: SessionLog) -> tuple[np.ndarray, np.ndarray]:
    """(choices, outcomes) matrices of shape (M, T) from a complete log."""
    if not log.complete:
        raise ValueError("session log is incomplete")
    M, T = log.spec.num_routes, log.spec.flights_per_route
    choices = np.zeros((M, T), dtype=int)
    outcomes = np.zeros((M, T), dtype=int)
    for row in log.rows:
        choices[row.route - 1, row.flight - 1] = row.airline
        outcomes[row.route - 1, row.flight - 1] = row.outcome
    return choices, outcomes
