"""Command-line entry point.

Exit codes: 0 success, 2 invalid input (bad flags, script errors, oversized
oracle instances), 3 an invariant was violated during the run.

Every subcommand calls the library in-process; with ``--server URL`` the same
request goes to a running ``proxysync serve`` instead.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import records
from .errors import OracleTooLarge, ProxySyncError, ScriptValidation
from .oracles import (assignment_report, demo_moves, masking_report, moves_from_trace, parse_assignment_input,
                      parse_moves)
from .proxy import DEFAULT_LIMITS
from .runner import (EXIT_INVALID, EXIT_OK, SUMMARY_FORMATS, RunConfig, RunOutcome, env_seed, format_summary,
                     load_script, prepare, execute)
from .scenarios.builtin import BUILDERS
from .scenarios.engine import run_scenario
from .scenarios.script import parse_script, script_text


def _non_negative(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxysync", description="Haptic proxy coordination simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its trace and metrics")
    run.add_argument("--scenario", required=True, help=f"one of {', '.join(BUILDERS)} or a script file")
    run.add_argument("--seed", type=int, help="seed override (falls back to $PROXYSYNC_SEED)")
    run.add_argument("--output", "-o", help="trace file; the trace goes to stdout when omitted")
    run.add_argument("--latency", type=_non_negative, dest="base_latency", help="channel base latency, s")
    run.add_argument("--jitter", type=_non_negative, help="channel jitter half-width, s")
    run.add_argument("--drop", type=_probability, help="channel drop probability")
    run.add_argument("--delay", type=_non_negative, help="rendering delay, s")
    run.add_argument("--summary", choices=SUMMARY_FORMATS, default="text", dest="summary_format")
    run.add_argument("--server", help="base URL of a running proxysync service")

    val = sub.add_parser("validate", help="check a scenario script")
    val.add_argument("path")
    val.add_argument("--server")

    scr = sub.add_parser("script", help="print a builtin scenario as a script file")
    scr.add_argument("name", choices=list(BUILDERS))
    scr.add_argument("--seed", type=int)
    scr.add_argument("--delay", type=_non_negative)
    scr.add_argument("--output", "-o")

    orc = sub.add_parser("oracle", help="brute-force analysis oracles")
    orc.add_argument("kind", choices=["assignment", "masking"])
    orc.add_argument("--input", "-i", help="record file (masking: moves or a scenario script; "
                                           "defaults to the demo fixture moves)")
    orc.add_argument("--server")

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return p


def _fail(msg: str, code: int = EXIT_INVALID) -> int:
    print(f"proxysync: error: {msg}", file=sys.stderr)
    return code


def _emit(outcome: RunOutcome, output: str | None, fmt: str) -> int:
    summary = format_summary(outcome.summary, fmt)
    if output:
        Path(output).write_text(outcome.trace_text)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(outcome.trace_text)
        sys.stderr.write(summary)
    for v in outcome.violations:
        print(f"proxysync: invariant violated: {v}", file=sys.stderr)
    return outcome.exit_code


def cmd_run(cfg: RunConfig, server: str | None = None) -> int:
    try:
        if server:
            outcome = _remote_run(cfg, server)
        else:
            outcome = execute(prepare(cfg))
    except ScriptValidation as exc:
        return _fail(str(exc))
    return _emit(outcome, cfg.output, cfg.summary_format)


def _client(server: str):
    import httpx
    return httpx.Client(base_url=server.rstrip("/"), timeout=120.0)


def _remote_run(cfg: RunConfig, server: str) -> RunOutcome:
    cfg.validate()
    seed = cfg.seed if cfg.seed is not None else env_seed()
    body = {"seed": seed, "delay": cfg.delay, "drop": cfg.drop, "base_latency": cfg.base_latency,
            "jitter": cfg.jitter}
    if cfg.scenario in BUILDERS:
        body["scenario"] = cfg.scenario
    else:
        path = Path(cfg.scenario)
        if not path.is_file():
            raise ScriptValidation(f"no builtin scenario or script file named {cfg.scenario!r}")
        body["script"] = path.read_text()
    with _client(server) as c:
        r = c.post("/scenarios/run", json=body)
    if r.status_code == 422:
        raise ScriptValidation(str(r.json().get("detail")))
    r.raise_for_status()
    data = r.json()
    return RunOutcome(data["trace"], data["summary"], data["violations"])


def cmd_validate(path: str, server: str | None = None) -> int:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        return _fail(str(exc))
    if server:
        with _client(server) as c:
            rep = c.post("/scripts/validate", json={"script": text}).json()
        if not rep["ok"]:
            return _fail(f"{path}: {rep['error']}")
    else:
        try:
            parse_script(text)
        except ScriptValidation as exc:
            return _fail(f"{path}: {exc}")
    print(f"{path}: ok")
    return EXIT_OK


def cmd_script(name: str, seed: int | None, delay: float | None, output: str | None) -> int:
    try:
        seed = seed if seed is not None else env_seed()
        text = script_text(load_script(name, seed, delay))
    except ScriptValidation as exc:
        return _fail(str(exc))
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(kind: str, input_path: str | None, server: str | None = None) -> int:
    text = None
    if input_path is not None:
        try:
            text = Path(input_path).read_text()
        except OSError as exc:
            return _fail(str(exc))
    try:
        if kind == "assignment":
            if text is None:
                return _fail("the assignment oracle needs --input")
            demands, pool = parse_assignment_input(text)
            if server:
                lines = _remote_oracle(server, "/oracles/assignment", {
                    "proxies": [{"id": k, "x": v.x, "y": v.y} for k, v in pool.items()],
                    "demands": [{"object": d.object_id, "x": d.position.x, "y": d.position.y} for d in demands]})
            else:
                lines = assignment_report(demands, pool)
        else:
            moves, limits = _masking_input(text)
            if server:
                lines = _remote_oracle(server, "/oracles/masking", {
                    "moves": [{"x0": m.start.position.x, "y0": m.start.position.y, "heading": m.start.heading,
                               "x": m.goal.x, "y": m.goal.y, "room": m.room} for m in moves],
                    "limits": {k: getattr(limits, k) for k in ("v_max", "w_max", "arrive_pos_tol",
                                                               "arrive_heading_tol", "distance_gain",
                                                               "heading_gain")}})
            else:
                lines = masking_report(moves, limits)
    except OracleTooLarge as exc:
        return _fail(f"{exc} (oracle bound: {exc.bound} proxies)")
    except (ProxySyncError, ValueError) as exc:
        return _fail(str(exc))
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _masking_input(text: str | None):
    if text is None:
        return demo_moves(), DEFAULT_LIMITS
    first = next((k for _, k, _ in records.iter_records(text.splitlines())), None)
    if first == "scenario":
        return moves_from_trace(run_scenario(parse_script(text))), DEFAULT_LIMITS
    return parse_moves(text)


def _remote_oracle(server: str, path: str, body: dict) -> list[str]:
    with _client(server) as c:
        r = c.post(path, json=body)
    if r.status_code == 422:
        detail = r.json().get("detail")
        if isinstance(detail, dict) and "bound" in detail:
            raise OracleTooLarge(detail["error"], detail["bound"])
        raise ValueError(str(detail))
    r.raise_for_status()
    return r.json()["records"]


def cmd_serve(host: str, port: int) -> int:
    import uvicorn
    from .service import create_app
    uvicorn.run(create_app(), host=host, port=port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        cfg = RunConfig(args.scenario, args.seed, args.output, args.base_latency, args.jitter, args.drop,
                        args.delay, args.summary_format)
        return cmd_run(cfg, args.server)
    if args.command == "validate":
        return cmd_validate(args.path, args.server)
    if args.command == "script":
        return cmd_script(args.name, args.seed, args.delay, args.output)
    if args.command == "oracle":
        return cmd_oracle(args.kind, args.input, args.server)
    return cmd_serve(args.host, args.port)


if __name__ == "__main__":
    sys.exit(main())
