import json

import numpy as np
import pytest

from metabandit.beliefs import build_hypothesis_grid
from metabandit.data_io import (FlightRow, SessionLog, append_flight_row,
                                history_arrays, log_from_session,
                                read_session_log, write_session_log)
from metabandit.dp import EpsGreedy
from metabandit.env import ConditionSpec, spec_from_condition
from metabandit.policies import PolicySpec
from metabandit.simulate import run_batch


@pytest.fixture(scope="module")
def session_log():
    spec = spec_from_condition(ConditionSpec.named("FarLow"), 3, 4, 21)
    cls = build_hypothesis_grid((0.2, 0.5, 0.8), 3)
    rec = run_batch(spec, PolicySpec("metadp", EpsGreedy(0.1)), cls, 1, 8)[0]
    return log_from_session(rec)


def test_log_roundtrip(tmp_path, session_log):
    path = tmp_path / "session.jsonl"
    write_session_log(path, session_log)
    loaded = read_session_log(path)
    assert loaded.spec == session_log.spec
    np.testing.assert_allclose(loaded.rates, session_log.rates)
    assert loaded.rows == session_log.rows
    assert loaded.complete


def test_log_file_is_json_lines(tmp_path, session_log):
    path = tmp_path / "session.jsonl"
    write_session_log(path, session_log)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 1 + len(session_log.rows)
    header = json.loads(lines[0])
    assert header["version"] == 1
    assert "env" in header and "rates" in header
    row = json.loads(lines[1])
    assert set(row) == {"m", "t", "airline", "outcome", "points_after",
                        "reaction_time_ms", "wall_clock"}


def test_points_ledger_consistency(session_log):
    running = 0
    for row in session_log.rows:
        running += 10 * row.outcome
        assert row.points_after == running
    assert session_log.points == running


def test_partial_log_replay(tmp_path, session_log):
    path = tmp_path / "partial.jsonl"
    partial = SessionLog(spec=session_log.spec, rates=session_log.rates,
                         rows=session_log.rows[:5])
    write_session_log(path, partial)
    loaded = read_session_log(path)
    assert len(loaded.rows) == 5
    assert not loaded.complete
    # appending flushed rows one at a time continues the log
    for row in session_log.rows[5:]:
        append_flight_row(path, row)
    assert read_session_log(path).complete


def test_validation_rejects_out_of_order_rows(session_log):
    rows = list(session_log.rows)
    rows[0], rows[1] = rows[1], rows[0]
    bad = SessionLog(spec=session_log.spec, rates=session_log.rates, rows=rows)
    with pytest.raises(ValueError):
        bad.validate()


def test_validation_rejects_bad_airline(session_log):
    rows = [FlightRow(route=1, flight=1, airline=99, outcome=1,
                      points_after=10)]
    bad = SessionLog(spec=session_log.spec, rates=session_log.rates, rows=rows)
    with pytest.raises(ValueError):
        bad.validate()


def test_history_arrays(session_log):
    choices, outcomes = history_arrays(session_log)
    assert choices.shape == outcomes.shape == (3, 4)
    for row in session_log.rows:
        assert choices[row.route - 1, row.flight - 1] == row.airline
        assert outcomes[row.route - 1, row.flight - 1] == row.outcome


def test_history_arrays_requires_complete_log(session_log):
    partial = SessionLog(spec=session_log.spec, rates=session_log.rates,
                         rows=session_log.rows[:3])
    with pytest.raises(ValueError):
        history_arrays(partial)


def test_unsupported_version_rejected(tmp_path, session_log):
    path = tmp_path / "bad.jsonl"
    header = session_log.header_json()
    header["version"] = 99
    path.write_text(json.dumps(header) + "\n")
    with pytest.raises(ValueError):
        read_session_log(path)
