"""Command-line front end.

Commands::

    streamsec run <scenario> [--horizon N] [--format text|structured]
                             [--params FILE]
    streamsec check-interfaces <scenario>
    streamsec knowledge <scenario> <t>

Scenarios are built-in names (honest, attack, fixed-honest,
fixed-attack) or paths to scenario files.  Exit codes: 0 secrecy holds,
2 a target leaked, 3 interface error, 4 assumption violated, 64 usage
error, 65 the command needs an adversary the scenario does not have.
Set STREAMSEC_COLOR=1 to colour text output (off by default, so output
stays byte-stable for golden comparisons).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from .components import AssumptionViolated, InterfaceMismatch, Trace, run
from .knowledge import KnowledgeBase, leak_check
from .scenarios import (
    Scenario,
    ScenarioError,
    builtin_names,
    load,
    observer_knowledge,
    parse_params_file,
)

EXIT_OK = 0
EXIT_LEAK = 2
EXIT_INTERFACE = 3
EXIT_ASSUMPTION = 4
EXIT_USAGE = 64
EXIT_NO_ADVERSARY = 65


@dataclass(frozen=True)
class Verdict:
    """Outcome of one scenario run; exit codes are a function of this."""

    scenario: str
    horizon: int
    interface_ok: bool = True
    secrecy_holds: bool = True
    leaks: tuple[tuple[str, int], ...] = ()
    aborts: tuple[tuple[str, int], ...] = ()
    assumption_violation: str | None = None

    def __post_init__(self) -> None:
        if self.secrecy_holds != (not self.leaks):
            raise ValueError("secrecy_holds must mirror an empty leak list")


def exit_code(verdict: Verdict) -> int:
    if not verdict.interface_ok:
        return EXIT_INTERFACE
    if verdict.assumption_violation is not None:
        return EXIT_ASSUMPTION
    if verdict.leaks:
        return EXIT_LEAK
    return EXIT_OK


def run_scenario(
    scenario: Scenario, horizon: int
) -> tuple[Trace | None, Verdict, KnowledgeBase | None]:
    try:
        trace = run(scenario.composite, horizon)
    except AssumptionViolated as violated:
        verdict = Verdict(
            scenario=scenario.name,
            horizon=horizon,
            assumption_violation=str(violated),
        )
        return None, verdict, None
    kb = observer_knowledge(scenario, trace)
    leaks: tuple[tuple[str, int], ...] = ()
    if kb is not None:
        found = leak_check(kb, scenario.targets, horizon)
        leaks = tuple((target.item.label, t) for target, t in found)
    aborts = tuple(trace.abort_events(scenario.composite.channel_types()))
    verdict = Verdict(
        scenario=scenario.name,
        horizon=horizon,
        secrecy_holds=not leaks,
        leaks=leaks,
        aborts=aborts,
    )
    return trace, verdict, kb


def _color_enabled() -> bool:
    return os.environ.get("STREAMSEC_COLOR", "0") == "1"


def _paint(text: str, code: str) -> str:
    if _color_enabled():
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _print_text(trace: Trace | None, verdict: Verdict, out) -> None:
    print(f"# scenario {verdict.scenario} (horizon {verdict.horizon})", file=out)
    if trace is not None:
        rendered = trace.render()
        if rendered:
            out.write(rendered)
    if verdict.assumption_violation is not None:
        print(_paint(f"# assumption violated: {verdict.assumption_violation}", "33"), file=out)
    aborts = ", ".join(f"{ch}@{t}" for ch, t in verdict.aborts) or "none"
    print(f"# aborts: {aborts}", file=out)
    leaks = ", ".join(f"{label} at t={t}" for label, t in verdict.leaks) or "none"
    print(f"# leaks: {leaks}", file=out)
    if verdict.secrecy_holds:
        print(_paint("# secrecy: HOLDS", "32"), file=out)
    else:
        print(_paint("# secrecy: VIOLATED", "31"), file=out)


def _print_structured(trace: Trace | None, verdict: Verdict, out) -> None:
    # One record per line.  The msg field is always last and runs to the
    # end of the line, since term renderings contain spaces.
    print(f"scenario={verdict.scenario}", file=out)
    print(f"horizon={verdict.horizon}", file=out)
    print(f"interface_ok={'true' if verdict.interface_ok else 'false'}", file=out)
    violation = verdict.assumption_violation or "none"
    print(f"assumption_violated={violation}", file=out)
    if trace is not None:
        for line in trace.render().splitlines():
            # "t=<n> <channel> : <msg>"
            t_part, rest = line.split(" ", 1)
            channel, message = rest.split(" : ", 1)
            print(f"trace {t_part} channel={channel} msg={message}", file=out)
    for channel, t in verdict.aborts:
        print(f"abort channel={channel} t={t}", file=out)
    for label, t in verdict.leaks:
        print(f"leak target={label} t={t}", file=out)
    print(f"secrecy_holds={'true' if verdict.secrecy_holds else 'false'}", file=out)


def cmd_run(args, out, err) -> int:
    scenario, code = _load_scenario(args, err)
    if scenario is None:
        return code
    horizon = args.horizon if args.horizon is not None else scenario.horizon
    trace, verdict, _ = run_scenario(scenario, horizon)
    if args.format == "structured":
        _print_structured(trace, verdict, out)
    else:
        _print_text(trace, verdict, out)
    return exit_code(verdict)


def cmd_check_interfaces(args, out, err) -> int:
    try:
        scenario = _load_raw(args)
    except InterfaceMismatch as mismatch:
        print(f"interface error: {mismatch}", file=err)
        return EXIT_INTERFACE
    except (KeyError, ScenarioError) as bad:
        print(f"error: {bad}", file=err)
        return EXIT_USAGE
    for wire in scenario.composite.wires:
        print(f"wire {wire.channel} [{wire.msg_type}] : {wire.describe()} OK", file=out)
    for channel, msg_type in scenario.composite.external_inputs:
        print(f"external input {channel} [{msg_type}]", file=out)
    for channel, msg_type in scenario.composite.external_outputs:
        print(f"external output {channel} [{msg_type}]", file=out)
    print(f"interfaces: {len(scenario.composite.wires)} wire(s) OK", file=out)
    return EXIT_OK


def cmd_knowledge(args, out, err) -> int:
    scenario, code = _load_scenario(args, err)
    if scenario is None:
        return code
    if scenario.observer is None:
        print(f"error: scenario '{scenario.name}' has no adversary component", file=err)
        return EXIT_NO_ADVERSARY
    if args.t < 0:
        print("error: time unit must be non-negative", file=err)
        return EXIT_USAGE
    trace, verdict, kb = run_scenario(scenario, args.t)
    if verdict.assumption_violation is not None:
        print(f"assumption violated: {verdict.assumption_violation}", file=err)
        return EXIT_ASSUMPTION
    out.write(kb.dump(args.t))
    return EXIT_OK


def _load_raw(args) -> Scenario:
    overrides = None
    if getattr(args, "params", None):
        overrides = parse_params_file(args.params)
    return load(args.scenario, overrides)


def _load_scenario(args, err) -> tuple[Scenario | None, int]:
    try:
        return _load_raw(args), EXIT_OK
    except InterfaceMismatch as mismatch:
        print(f"interface error: {mismatch}", file=err)
        return None, EXIT_INTERFACE
    except KeyError:
        known = ", ".join(builtin_names())
        print(
            f"error: unknown scenario '{args.scenario}' (built-ins: {known})",
            file=err,
        )
        return None, EXIT_USAGE
    except (ScenarioError, OSError) as bad:
        print(f"error: {bad}", file=err)
        return None, EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="streamsec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate a scenario and report the secrecy verdict")
    run_p.add_argument("scenario", help="built-in name or scenario file path")
    run_p.add_argument("--horizon", type=int, default=None, help="last simulated time unit")
    run_p.add_argument("--format", choices=("text", "structured"), default="text")
    run_p.add_argument("--params", default=None, help="atom label override file")
    run_p.set_defaults(handler=cmd_run)

    check_p = sub.add_parser("check-interfaces", help="validate the wiring only")
    check_p.add_argument("scenario")
    check_p.add_argument("--params", default=None)
    check_p.set_defaults(handler=cmd_check_interfaces)

    know_p = sub.add_parser("knowledge", help="dump the adversary's derived terms at a time unit")
    know_p.add_argument("scenario")
    know_p.add_argument("t", type=int)
    know_p.add_argument("--params", default=None)
    know_p.set_defaults(handler=cmd_knowledge)
    return parser


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    return args.handler(args, out, err)


def entry() -> None:
    sys.exit(main())
