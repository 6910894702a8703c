"""Command-line front end.

Exit codes: 0 success or equivalent, 1 internal error or inequivalent,
2 input error, 3 unverifiable at desk scale.

The main artifact of a command goes to ``--out`` when given (written only
after it is complete) and to stdout otherwise.  The human summary goes to
stdout when the artifact is in a file and to stderr when it is on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, compute_depth, dumps_with_angles
from .decompose import build_schedule, decompose, rewrite_trace
from .pauli import Angle, PauliString, parse_pauli
from .render import schedule_svg, schedule_text, trace_text
from .verify import LimitExceeded, check_equivalence, target_exponential

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNVERIFIABLE = 0, 1, 2, 3


class InputError(ValueError):
    pass


@dataclass
class CliConfig:
    command: str
    pauli: PauliString | None = None
    theta: Angle | None = None
    emit: str = "json"
    limit: int | None = None
    seed: int = 0
    out: str | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _angle(text: str) -> Angle:
    try:
        return Angle.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pauliforge", description="Constant-depth decomposition of Pauli exponentials.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, emits, default):
        p.add_argument("--pauli", required=True, help="Pauli string over I, X, Y, Z")
        p.add_argument("--theta", required=True, type=_angle, help="radians, or pi/2, pi/4, pi/8")
        if emits:
            p.add_argument("--emit", choices=emits, default=default)
        p.add_argument("--out", help="write the main output to this file")

    def limit(p):
        p.add_argument("--limit", type=_positive, help="dense live-qubit limit (PAULIFORGE_DENSE_LIMIT)")

    p = sub.add_parser("decompose", help="build the measurement-based circuit")
    common(p, ["json", "text"], "json")

    p = sub.add_parser("verify", help="check the decomposition against the exact exponential")
    common(p, None, None)
    limit(p)
    p.add_argument("--corrupt-theta", action="store_true", help="check against the negated angle (negative control)")

    p = sub.add_parser("trace", help="emit the rewrite trace")
    common(p, None, None)
    limit(p)
    p.add_argument("--check", action="store_true", help="verify every step against the target")
    p.add_argument("--render", action="store_true", help="also print each step as text")

    p = sub.add_parser("schedule", help="render the layered interaction schedule")
    p.add_argument("--n", required=True, type=_positive, help="number of data qubits")
    p.add_argument("--theta", type=_angle, default=Angle.parse("pi/8"))
    p.add_argument("--emit", choices=["text", "svg"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("stats", help="seeded random decompose-and-verify suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=_positive, default=20)
    p.add_argument("--max-n", type=_positive, default=3)
    limit(p)
    p.add_argument("--out")
    return parser


def _pauli(text: str) -> PauliString:
    try:
        return parse_pauli(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _deliver(artifact: str, summary: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(artifact)
        if summary:
            sys.stderr.write(summary)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pauliforge-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(artifact)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    if summary:
        sys.stdout.write(summary)


def _summary(c: Circuit, p: PauliString, theta: Angle) -> str:
    rep = compute_depth(c)
    lines = [
        f"pauli {p.letters}  theta {theta.value:.17g} ({theta.kind.value})",
        f"data qubits {c.num_data}  support {len(p.support)}",
        f"layers {rep.total_layers}  two-body layers {rep.two_body_layers}",
        f"interaction ancillas {rep.max_ancillas}  theta ancillas {rep.theta_ancillas}",
    ]
    if rep.theta_ancillas == 0:
        lines.append("no theta ancilla: the exponential is Clifford")
    lines.append("LNN ok" if not rep.lnn_violations else f"LNN violations {len(rep.lnn_violations)}")
    return "\n".join(lines) + "\n"


def cmd_decompose(cfg: CliConfig) -> int:
    c = decompose(cfg.pauli, cfg.theta)
    artifact = c.to_json() + "\n" if cfg.emit == "json" else c.summary() + "\n"
    _deliver(artifact, _summary(c, cfg.pauli, cfg.theta), cfg.out)
    return EXIT_OK


def cmd_verify(cfg: CliConfig, corrupt: bool = False) -> int:
    c = decompose(cfg.pauli, cfg.theta)
    want = -cfg.theta if corrupt else cfg.theta
    try:
        target = target_exponential(cfg.pauli, want)
    except LimitExceeded as exc:
        report = {"equivalent": False, "status": "unverifiable at desk scale", "reason": str(exc)}
        _deliver(json.dumps(report, indent=2) + "\n", "", cfg.out)
        return EXIT_UNVERIFIABLE
    verdict = check_equivalence(c, target)
    _deliver(verdict.to_json() + "\n", "", cfg.out)
    if verdict.status == "unverifiable":
        return EXIT_UNVERIFIABLE
    return EXIT_OK if verdict.equivalent else EXIT_FAIL


def cmd_trace(cfg: CliConfig, check: bool = False, render: bool = False) -> int:
    steps = rewrite_trace(cfg.pauli, cfg.theta)
    records = [s.to_dict() for s in steps]
    status = EXIT_OK
    notes = []
    if check:
        try:
            target = target_exponential(cfg.pauli, cfg.theta)
        except LimitExceeded as exc:
            target = None
            notes.append(f"steps unverifiable: {exc}")
            status = EXIT_UNVERIFIABLE
        if target is not None:
            for k, (step, rec) in enumerate(zip(steps, records)):
                verdict = check_equivalence(step.circuit, target)
                rec["verdict"] = verdict.to_dict()
                notes.append(f"step {k} {step.rule.value}: {verdict.status}")
                if verdict.status == "unverifiable" and status == EXIT_OK:
                    status = EXIT_UNVERIFIABLE
                elif verdict.status == "inequivalent":
                    status = EXIT_FAIL
    summary = trace_text(steps) if render else ""
    summary += "".join(n + "\n" for n in notes)
    summary += "rules " + (" ".join(s.rule.value for s in steps) or "(none)") + "\n"
    _deliver(dumps_with_angles(records) + "\n", summary, cfg.out)
    return status


def cmd_schedule(cfg: CliConfig, n: int) -> int:
    s = build_schedule(n, cfg.theta)
    artifact = schedule_svg(s) if cfg.emit == "svg" else schedule_text(s)
    summary = f"n {n}  rounds {len(s.rounds)}  two-body rounds {s.two_body_rounds}  ancillas {s.ancillas}\n"
    _deliver(artifact, summary, cfg.out)
    return EXIT_OK


STATS_ANGLES = ("pi/2", "pi/4", "pi/8", "0.3", "1.234")


def cmd_stats(cfg: CliConfig, count: int, max_n: int) -> int:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        letters = "".join("IXYZ"[int(k)] for k in rng.integers(0, 4, size=n))
        if set(letters) == {"I"}:
            letters = letters[:-1] + "Z"
        token = STATS_ANGLES[int(rng.integers(len(STATS_ANGLES)))]
        p, theta = parse_pauli(letters), Angle.parse(token)
        c = decompose(p, theta)
        rep = compute_depth(c)
        verdict = check_equivalence(c, target_exponential(p, theta))
        rows.append({
            "pauli": letters,
            "theta": token,
            "status": verdict.status,
            "branches": verdict.branches,
            "two_body_layers": rep.two_body_layers,
            "ancillas": rep.max_ancillas + rep.theta_ancillas,
        })
    counts: dict[str, int] = {}
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    report = {"seed": cfg.seed, "count": count, "max_n": max_n, "status_counts": counts, "cases": rows}
    summary = " ".join(f"{k} {v}" for k, v in sorted(counts.items())) + "\n"
    _deliver(json.dumps(report, indent=2) + "\n", summary, cfg.out)
    if counts.get("inequivalent"):
        return EXIT_FAIL
    return EXIT_OK if not counts.get("unverifiable") else EXIT_UNVERIFIABLE


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "limit", None) is not None:
            os.environ["PAULIFORGE_DENSE_LIMIT"] = str(args.limit)
        cfg = CliConfig(
            command=args.command,
            pauli=_pauli(args.pauli) if hasattr(args, "pauli") else None,
            theta=getattr(args, "theta", None),
            emit=getattr(args, "emit", None) or "json",
            limit=getattr(args, "limit", None),
            seed=getattr(args, "seed", 0),
            out=args.out,
        )
        if args.command == "decompose":
            return cmd_decompose(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, corrupt=args.corrupt_theta)
        if args.command == "trace":
            return cmd_trace(cfg, check=args.check, render=args.render)
        if args.command == "schedule":
            return cmd_schedule(cfg, args.n)
        return cmd_stats(cfg, args.count, args.max_n)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LimitExceeded as exc:
        print(f"unverifiable at desk scale: {exc}", file=sys.stderr)
        return EXIT_UNVERIFIABLE
    except Exception as exc:  # noqa: BLE001 - the exit code contract covers every failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
