import pytest

from proxysync import records
from proxysync.errors import OracleTooLarge
from proxysync.oracles import (assignment_report, demo_moves, masking_report, minimal_delay, moves_from_trace,
                               parse_assignment_input, parse_moves)
from proxysync.proxy import RobotLimits
from proxysync.scenarios.builtin import pass_the_mug
from proxysync.scenarios.engine import run_scenario


def test_assignment_report():
    demands, pool = parse_assignment_input(
        "proxy id=1 x=0.05 y=0\nproxy id=2 x=0.5 y=0\ndemand object=a x=0 y=0\ndemand object=b x=0.4 y=0\n")
    lines = assignment_report(demands, pool)
    assert lines[:2] == ["assign object=a proxy=1", "assign object=b proxy=2"]
    kind, f = records.parse_record(lines[-1])
    assert kind == "assignment"
    assert f == {"demands": 2, "proxies": 2, "makespan": pytest.approx(0.1)}


def test_assignment_input_errors():
    with pytest.raises(ValueError, match="line 1"):
        parse_assignment_input("proxy x=0 y=0\n")
    with pytest.raises(ValueError, match="unexpected"):
        parse_assignment_input("robot id=1\n")


def test_assignment_too_large():
    text = "".join(f"proxy id={i} x={i / 10} y=0\n" for i in range(7)) + "demand object=a x=0 y=0\n"
    with pytest.raises(OracleTooLarge):
        assignment_report(*parse_assignment_input(text))


def test_demo_minimal_delay_in_measured_band():
    moves = demo_moves()
    assert len(moves) == 18
    assert 1.0 <= minimal_delay(moves) <= 1.5


def test_parse_moves_with_limits():
    moves, lim = parse_moves("move x0=0 y0=0 heading=0 x=0.6 y=0\nlimits v_max=0.4 w_max=3.141593\n")
    assert lim == RobotLimits(v_max=0.4, w_max=3.141593)
    assert minimal_delay(moves, lim) == pytest.approx(2.7, abs=1e-5)


def test_masking_report_lines():
    moves, _ = parse_moves("move x0=0 y0=0 x=0 y=0\n")
    lines = masking_report(moves)
    assert records.parse_record(lines[-1]) == ("masking", {"moves": 1, "min_delay": 0.2})


def test_moves_from_trace_cover_landings():
    trace = run_scenario(pass_the_mug(0))
    moves = moves_from_trace(trace)
    landings = [f for f in trace.of_kind("contact") if f["kind"] == "landing"]
    assert len(moves) == len(landings) > 0
    assert minimal_delay(moves) <= 1.5
