"""Command-line entry point.

Exit codes: 0 success, 1 usage or internal error (including a failed
``verify``), 2 protocol aborted (``run``).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from pathlib import Path

from . import __version__, adversary, analysis, bell, game, protocol, verify

REPORT_SCHEMA = "diqss-report/1"

EXIT_OK, EXIT_ERROR, EXIT_ABORTED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _common(p: argparse.ArgumentParser, seeded: bool = False) -> None:
    p.add_argument("--config", help="JSON file with flag values (flags win on conflict)")
    p.add_argument("--json", action="store_true", help="print the JSON report instead of text")
    p.add_argument("--report", help="also write the JSON report to this file")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation time from reports")
    p.add_argument("--workers", type=_positive_int, default=1)
    if seeded:
        p.add_argument("--seed", type=int, default=None, help="master seed (fallback: $DIQSS_SEED, then 0)")


def _protocol_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--rounds", type=_positive_int, default=200)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--ec", type=_positive_int, default=10, help="hash tag length in dits")
    p.add_argument("--attack", default="none", help="none | noise:v=V | intercept:targets=K[,K] | classical:best")
    p.add_argument("--p-ref", default="oracle", help="oracle | paper | a number")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diqss", description="Device-independent qudit secret sharing toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bell", help="quantum value, classical bound and LHV maximum of the Bell functional")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--convention", choices=bell.CONVENTIONS, default="main")
    _common(p)

    p = sub.add_parser("game", help="quantum, classical and closed-form win probabilities")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--d", type=int, default=2)
    _common(p)

    p = sub.add_parser("run", help="execute the secret sharing protocol once")
    _protocol_flags(p)
    p.add_argument("--secret", default=None, help="dealer secret as digits (e.g. 1011) or comma separated")
    p.add_argument("--out", default=None, help="write <out>.csv and <out>.json transcripts")
    _common(p, seeded=True)

    p = sub.add_parser("abort-rate", help="empirical abort rate over repeated protocol runs")
    _protocol_flags(p)
    p.add_argument("--trials", type=_positive_int, default=100)
    _common(p, seeded=True)

    p = sub.add_parser("bounds", help="finite-statistics bounds")
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--rounds", type=_positive_int, default=200)
    p.add_argument("--ec", type=_positive_int, default=10)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--t", type=_positive_int, default=None, help="number of test rounds (default round(mu*M))")
    p.add_argument("--eps-test", type=float, default=0.01)
    p.add_argument("--eps-qss", type=float, default=0.01)
    _common(p)

    p = sub.add_parser("verify", help="run the oracle-equivalence suite")
    _common(p)
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise UsageError(f"unknown command {command}")


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(values, dict):
            raise UsageError("config file must hold a JSON object")
        sp = _subparser(parser, args.command)
        known = {a.dest for a in sp._actions}
        cleaned = {}
        for key, value in values.items():
            dest = key.lstrip("-").replace("-", "_")
            if dest not in known or dest in ("config", "help"):
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            cleaned[dest] = value
        sp.set_defaults(**cleaned)
        args = parser.parse_args(argv)
    if getattr(args, "seed", "absent") is None:
        env = os.environ.get("DIQSS_SEED")
        try:
            args.seed = int(env) if env else 0
        except ValueError:
            raise UsageError(f"DIQSS_SEED must be an integer, got {env!r}") from None
    return args


def _parse_secret(text: str | None) -> list[int] | None:
    if text is None:
        return None
    parts = text.split(",") if "," in text else list(text.strip())
    try:
        return [int(p) for p in parts if p != ""]
    except ValueError:
        raise UsageError(f"cannot parse secret {text!r}") from None


def _protocol_config(args) -> protocol.ProtocolConfig:
    try:
        attack = adversary.parse_attack(args.attack, args.n, args.d)
    except (ValueError, adversary.InvalidAttack) as exc:
        raise UsageError(str(exc)) from None
    if args.p_ref in ("oracle", "paper"):
        mode, value = args.p_ref, None
    else:
        try:
            mode, value = "explicit", float(args.p_ref)
        except ValueError:
            raise UsageError(f"--p-ref must be oracle, paper or a number, got {args.p_ref!r}") from None
    try:
        return protocol.ProtocolConfig(
            n=args.n, d=args.d, rounds=args.rounds, mu=args.mu, eta=args.eta, ec_length=args.ec,
            p_ref_mode=mode, p_ref_value=value, seed=args.seed, attack=attack,
        )
    except protocol.ProtocolError as exc:
        raise UsageError(str(exc)) from None


def _format_lines(obj, prefix: str = "") -> list[str]:
    lines = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            name = f"{prefix}.{key}" if prefix else str(key)
            if isinstance(value, dict) or (isinstance(value, list) and value and isinstance(value[0], dict)):
                lines.extend(_format_lines(value, name))
            else:
                lines.append(f"{name}: {_scalar(value)}")
    elif isinstance(obj, list):
        for i, value in enumerate(obj):
            lines.extend(_format_lines(value, f"{prefix}[{i}]"))
    else:
        lines.append(f"{prefix}: {_scalar(obj)}")
    return lines


def _scalar(value) -> str:
    if isinstance(value, list):
        if all(isinstance(v, int) and not isinstance(v, bool) for v in value) and len(value) > 20:
            return "".join(str(v) for v in value) if all(0 <= v < 10 for v in value) else ",".join(map(str, value))
        return "[" + ", ".join(_scalar(v) for v in value) + "]"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "-"
    return str(value)


def _report_text(args, body: dict) -> str:
    report = {"schema": REPORT_SCHEMA, "command": args.command, "version": __version__, "report": body}
    if not args.no_timestamp:
        report["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report).write_text(text)
    return text


def _emit(args, body: dict) -> None:
    text = _report_text(args, body)
    if args.json:
        sys.stdout.write(text)
    else:
        sys.stdout.write("\n".join(_format_lines(body)) + "\n")


def _cmd_bell(args) -> int:
    report = bell.bell_report(args.n, args.d, args.convention, args.workers)
    _emit(args, report.to_dict())
    return EXIT_OK


def _cmd_game(args) -> int:
    report = game.game_report(game.GameSpec(args.n, args.d), args.workers)
    _emit(args, report.to_dict())
    return EXIT_OK


def _cmd_run(args) -> int:
    config = _protocol_config(args)
    secret = _parse_secret(args.secret)
    try:
        result, transcript = protocol.run(config, secret, args.workers)
    except protocol.ProtocolError as exc:
        raise UsageError(str(exc)) from None
    body = {"config": config.to_dict(), "result": result.to_dict()}
    if secret is not None:
        body["secret_recovered"] = result.recovered_secret is not None and result.recovered_secret[: len(secret)] == secret
    if args.out:
        csv_path, json_path = protocol.write_transcript(args.out, config, result, transcript)
        body["transcript_csv"] = str(csv_path)
        body["transcript_json"] = str(json_path)
    _emit(args, body)
    return EXIT_OK if result.aborted == "no" else EXIT_ABORTED


def _cmd_abort_rate(args) -> int:
    config = _protocol_config(args)
    report = analysis.abort_rate_experiment(config, args.trials, workers=args.workers)
    body = {
        "config": config.to_dict(),
        "abort_rate": report.to_dict(),
        "epsilon_complete": analysis.epsilon_complete(config.mu, config.eta, config.rounds),
    }
    _emit(args, body)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    try:
        report = analysis.bounds_report(
            args.mu, args.eta, args.rounds, args.ec, args.d, args.t, args.eps_test, args.eps_qss
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, report.to_dict())
    return EXIT_OK


def _cmd_verify(args) -> int:
    results = verify.run_all(args.workers)
    failed = [c for c in results if not c.passed]
    body = {
        "checks": [c.to_dict() for c in results],
        "passed": len(results) - len(failed),
        "failed": len(failed),
    }
    text = _report_text(args, body)
    if args.json:
        sys.stdout.write(text)
    else:
        for c in results:
            print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        print(f"{body['passed']} passed, {body['failed']} failed")
    return EXIT_ERROR if failed else EXIT_OK


COMMANDS = {
    "bell": _cmd_bell,
    "game": _cmd_game,
    "run": _cmd_run,
    "abort-rate": _cmd_abort_rate,
    "bounds": _cmd_bounds,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, MemoryError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
