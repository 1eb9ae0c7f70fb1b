"""Command-line entry point: run scenarios and eps sweeps.

Usage:
    vacuumcorr run --scenario root-cert --layout 2,2 --seed 7 --eps 0.01
    vacuumcorr sweep --scenario root-cert --layout 2,2 --eps-list 0.1,0.01

A JSON config file may supply any field; explicit flags override it.
Exit status: 0 all assertions passed, 1 some failed, 2 invalid config.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    SCENARIOS,
    ConfigError,
    ScenarioConfig,
    emit_report,
    render_report,
    run_scenario,
    sweep_eps,
)


def _parse_layout(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError("layout", f"expected comma-separated integers, got {text!r}") from exc


def _parse_eps_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError("sweep", f"expected comma-separated numbers, got {text!r}") from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", choices=SCENARIOS)
    parser.add_argument("--layout", help="comma-separated local dims, e.g. 2,2 or 2,2,4")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--eps", type=float)
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--timings", action="store_true",
                        help="include wall-clock timings (non-deterministic output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vacuumcorr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one scenario")
    _add_common(run_p)
    sweep_p = sub.add_parser("sweep", help="run a scenario over a list of eps values")
    _add_common(sweep_p)
    sweep_p.add_argument("--eps-list", help="comma-separated, strictly decreasing")
    return parser


def _load_config(args: argparse.Namespace) -> ScenarioConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON in {args.config}: {exc}") from exc
    if args.scenario:
        data["scenario"] = args.scenario
    if args.layout:
        data["layout"] = _parse_layout(args.layout)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.eps is not None:
        data["eps"] = args.eps
    if getattr(args, "eps_list", None):
        data["sweep"] = _parse_eps_list(args.eps_list)
    return ScenarioConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "run":
            report = run_scenario(cfg)
        else:
            report = sweep_eps(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        emit_report(report, args.format, args.out, include_timings=args.timings)
    else:
        sys.stdout.write(render_report(report, args.format, include_timings=args.timings))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
