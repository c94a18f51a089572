"""Running a scenario from a configuration: the one code path behind the CLI and the service."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import records
from .errors import ScriptValidation
from .scenarios.builtin import BUILDERS, builtin_script
from .scenarios.engine import run_scenario_checked
from .scenarios.metrics import compute_metrics
from .scenarios.script import ScenarioScript, parse_script
from .sync import ChannelModel

SEED_ENV = "PROXYSYNC_SEED"
EXIT_OK, EXIT_INVALID, EXIT_VIOLATION = 0, 2, 3
SUMMARY_FORMATS = ("text", "records")


@dataclass
class RunConfig:
    scenario: str  # builtin name or path to a script file
    seed: int | None = None
    output: str | None = None
    base_latency: float | None = None
    jitter: float | None = None
    drop: float | None = None
    delay: float | None = None
    summary_format: str = "text"

    def validate(self) -> None:
        if self.drop is not None and not 0.0 <= self.drop <= 1.0:
            raise ScriptValidation(f"--drop must lie in [0, 1], got {self.drop}")
        for name in ("delay", "base_latency", "jitter"):
            v = getattr(self, name)
            if v is not None and not v >= 0.0:
                raise ScriptValidation(f"--{name.replace('_', '-')} must be >= 0, got {v}")
        if self.summary_format not in SUMMARY_FORMATS:
            raise ScriptValidation(f"summary format must be one of {SUMMARY_FORMATS}")


@dataclass
class RunOutcome:
    trace_text: str
    summary: dict
    violations: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_VIOLATION if self.violations else EXIT_OK


def env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ScriptValidation(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def load_script(scenario: str, seed: int | None = None, delay: float | None = None) -> ScenarioScript:
    """A builtin scenario by name, or a script file; ``seed`` and ``delay`` override."""
    if scenario in BUILDERS:
        return builtin_script(scenario, 0 if seed is None else seed, delay)
    path = Path(scenario)
    if not path.is_file():
        raise ScriptValidation(f"no builtin scenario or script file named {scenario!r}")
    return with_seed_and_delay(parse_script(path.read_text()), seed, delay)


def with_seed_and_delay(script: ScenarioScript, seed: int | None, delay: float | None) -> ScenarioScript:
    """Override a parsed script's seed (channel included) and rendering delay."""
    if seed is not None:
        script.seed = seed
        script.channel = replace(script.channel, seed=seed)
    if delay is not None:
        if delay < 0:
            raise ScriptValidation(f"delay must be >= 0, got {delay}")
        script.delay = delay
    return script


def apply_overrides(script: ScenarioScript, cfg: RunConfig) -> ScenarioScript:
    ch = script.channel
    try:
        script.channel = ChannelModel(
            ch.base_latency if cfg.base_latency is None else cfg.base_latency,
            ch.jitter if cfg.jitter is None else cfg.jitter,
            ch.drop_prob if cfg.drop is None else cfg.drop,
            ch.seed,
        )
    except ValueError as exc:
        raise ScriptValidation(str(exc)) from exc
    return script


def prepare(cfg: RunConfig) -> ScenarioScript:
    cfg.validate()
    seed = cfg.seed if cfg.seed is not None else env_seed()
    return apply_overrides(load_script(cfg.scenario, seed, cfg.delay), cfg)


def execute(script: ScenarioScript) -> RunOutcome:
    result = run_scenario_checked(script)
    summary = compute_metrics(result.trace).summary()
    return RunOutcome(result.trace.text(), summary, list(result.violations))


def run(cfg: RunConfig) -> RunOutcome:
    return execute(prepare(cfg))


def format_summary(summary: dict, fmt: str = "text") -> str:
    if fmt == "records":
        return records.format_record("metrics", summary) + "\n"
    lines = []
    for k, v in summary.items():
        lines.append(f"{k}: {records.format_value(v) if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"
