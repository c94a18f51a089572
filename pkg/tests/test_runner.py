import pytest

from proxysync import records
from proxysync.errors import ScriptValidation
from proxysync.runner import EXIT_OK, EXIT_VIOLATION, RunConfig, RunOutcome, env_seed, format_summary, load_script, run
from proxysync.scenarios.script import script_text


def test_env_seed(monkeypatch):
    monkeypatch.delenv("PROXYSYNC_SEED", raising=False)
    assert env_seed() is None
    monkeypatch.setenv("PROXYSYNC_SEED", "17")
    assert env_seed() == 17
    monkeypatch.setenv("PROXYSYNC_SEED", "abc")
    with pytest.raises(ScriptValidation):
        env_seed()


def test_seed_falls_back_to_env(monkeypatch):
    monkeypatch.setenv("PROXYSYNC_SEED", "9")
    via_env = run(RunConfig("pass_the_mug")).trace_text
    explicit = run(RunConfig("pass_the_mug", seed=9)).trace_text
    assert via_env == explicit
    assert "seed=9" in via_env.splitlines()[0]


def test_overrides_reach_the_trace():
    text = run(RunConfig("pass_the_mug", seed=1, drop=0.3, base_latency=0.1, jitter=0.0, delay=1.2)).trace_text
    _, ch = records.parse_record(text.splitlines()[1])
    assert ch["drop"] == 0.3 and ch["base_latency"] == 0.1 and ch["jitter"] == 0.0
    assert "delay=1.200000" in text.splitlines()[0]


@pytest.mark.parametrize("cfg", [RunConfig("pass_the_mug", drop=1.5), RunConfig("pass_the_mug", delay=-1.0),
                                 RunConfig("nowhere"), RunConfig("pass_the_mug", summary_format="xml")])
def test_invalid_configs(cfg):
    with pytest.raises(ScriptValidation):
        run(cfg)


def test_load_script_from_file(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(script_text(load_script("city_builder", 3)))
    assert load_script(str(path), seed=5).seed == 5


def test_exit_code():
    assert RunOutcome("", {}).exit_code == EXIT_OK
    assert RunOutcome("", {}, ["boom"]).exit_code == EXIT_VIOLATION


def test_summary_formats():
    s = {"contacts": 2, "mean_lead_time": 0.5}
    assert format_summary(s) == "contacts: 2\nmean_lead_time: 0.500000\n"
    assert format_summary(s, "records") == "metrics contacts=2 mean_lead_time=0.500000\n"
