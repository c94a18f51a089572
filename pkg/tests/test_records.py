import pytest
from hypothesis import given
from hypothesis import strategies as st

from proxysync import records

keys = st.from_regex(r"[a-z_][a-z0-9_]{0,8}", fullmatch=True)
values = st.one_of(st.booleans(), st.integers(-10**9, 10**9), st.text(max_size=12),
                   st.floats(-1e6, 1e6).map(lambda f: float(records.format_value(f))))


def test_keys_sorted_and_floats_fixed():
    assert records.format_record("robot", {"y": 0.5, "id": 3, "x": -0.0}) == "robot id=3 x=0.000000 y=0.500000"


def test_strings_quoted_when_ambiguous():
    assert records.format_value("mug") == "mug"
    assert records.format_value("two words") == '"two words"'
    assert records.format_value("true") == '"true"'
    assert records.format_value("1.5") == '"1.5"'


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        records.format_value(float("nan"))


def test_parse_errors():
    with pytest.raises(ValueError):
        records.parse_record("robot x")
    with pytest.raises(ValueError):
        records.parse_record("robot x=1 x=2")


def test_iter_records_skips_comments_and_reports_lines():
    lines = ["# header", "", "a k=1", "b"]
    assert list(records.iter_records(lines)) == [(3, "a", {"k": 1}), (4, "b", {})]
    with pytest.raises(ValueError, match="line 2"):
        list(records.iter_records(["a", "b k"]))


@given(st.dictionaries(keys, values, max_size=6))
def test_round_trip(fields):
    line = records.format_record("rec", fields)
    kind, back = records.parse_record(line)
    assert kind == "rec"
    assert back == fields
    assert records.format_record(kind, back) == line
