"""Command-line entry point: ``heraldix <command> ...``.

Exit codes: 0 success, 1 usage or parse error, 2 infeasible optimization,
3 failed verification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

from . import __version__
from .errors import HeraldixError, InfeasibleError
from .fock import StateVector
from .heralding import SchemeConfig, ideal_output
from .optimizer import Budget, TargetState, optimize, phi_sweep

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    """Everything needed to replay a command."""

    command: str
    arguments: dict
    seed: Optional[int] = None
    version: str = __version__
    extra: dict = field(default_factory=dict)


# --- parsing helpers -----------------------------------------------------------------

_NUM = re.compile(r"^\s*(?:(?P<coef>[-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)\s*\*?\s*)?(?P<pi>pi)?"
                  r"\s*(?:/\s*(?P<den>\d*\.?\d+))?\s*$")


def parse_number(text: str) -> float:
    """Float literal or a multiple of pi such as ``pi``, ``3pi/4``, ``-0.5*pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    s = text.strip().lower()
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    m = _NUM.match(s)
    if not m or (m.group("coef") is None and m.group("pi") is None):
        raise UsageError(f"cannot parse number {text!r}")
    val = float(m.group("coef")) if m.group("coef") else 1.0
    if m.group("pi"):
        val *= math.pi
    if m.group("den"):
        val /= float(m.group("den"))
    return -val if neg else val


def parse_grid(text: str) -> List[float]:
    """``start:stop:count`` (inclusive, evenly spaced) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError("grid ranges use start:stop:count")
        a, b = parse_number(parts[0]), parse_number(parts[1])
        try:
            n = int(parts[2])
        except ValueError:
            raise UsageError(f"grid count {parts[2]!r} is not an integer") from None
        if n < 1:
            raise UsageError("grid count must be positive")
        return [a] if n == 1 else [a + (b - a) * i / (n - 1) for i in range(n)]
    return [parse_number(p) for p in text.split(",") if p.strip()]


def parse_shape(text: Optional[str]):
    if text is None:
        return None
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"shape {text!r} must be four integers N,K,L,M") from None
    if len(vals) != 4:
        raise UsageError("shape must be N,K,L,M")
    return vals


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from None


def load_config(path: str, unitary_atol: float = 1e-9) -> SchemeConfig:
    """Accepts a bare config document or an optimization result containing one."""
    doc = _read_json(path)
    if "config" in doc:
        doc = doc["config"]
    return SchemeConfig.from_json(doc, unitary_atol=unitary_atol)


def parse_input_state(text: Optional[str], n: int) -> StateVector:
    if text is None:
        return StateVector.basis((1,) * n)
    if re.fullmatch(r"[01]+", text):
        if len(text) != n:
            raise UsageError(f"input {text!r} has {len(text)} modes, scheme has {n}")
        return StateVector.basis(text)
    return StateVector.from_json(_read_json(text))


def build_target(args) -> TargetState:
    if args.target == "cluster":
        return TargetState.cluster(args.phi if args.phi is not None else math.pi, args.chi)
    if args.target == "ghz":
        return TargetState.ghz(args.phi if args.phi is not None else 0.0, args.n_qubits)
    return TargetState.from_json(_read_json(args.target))


# --- output --------------------------------------------------------------------------

def write_atomic(path: Optional[str], text: str) -> None:
    """Write via a temporary file in the same directory and rename; ``None`` means stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".heraldix-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else repr(float(v)) for v in row])
    return buf.getvalue()


def _manifest(args, command: str) -> dict:
    skip = {"func"}
    arguments = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return asdict(RunManifest(command, arguments, getattr(args, "seed", None)))


# --- commands ------------------------------------------------------------------------

def cmd_optimize(args) -> int:
    target = build_target(args)
    budget = Budget(restarts=args.restarts, max_evals=args.max_evals)
    try:
        result = optimize(target, parse_shape(args.shape), budget, args.seed, args.method)
    except InfeasibleError as exc:
        doc = {"manifest": _manifest(args, "optimize"), "error": str(exc),
               "best_residual": exc.best_residual}
        write_atomic(args.output, dumps(doc))
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    doc = result.to_json()
    doc["manifest"] = _manifest(args, "optimize")
    write_atomic(args.output, dumps(doc))
    if args.output not in (None, "-"):
        print(f"success_probability={result.success_probability!r} residual={result.residual!r}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verification as v

    if args.suite == "appendix-d":
        checks = v.appendix_d_checks()
    elif args.suite == "oracle-suite":
        checks = v.oracle_checks(args.seed)
    elif args.suite == "loss":
        checks = v.loss_checks()
    else:
        cfg = load_config(args.config) if args.config else None
        checks = v.measurement_checks(cfg)
    for check in checks:
        print(check.line())
    return EXIT_OK if v.all_passed(checks) else EXIT_VERIFY


def cmd_sweep(args) -> int:
    grid = parse_grid(args.grid)
    if args.kind == "phi":
        budget = Budget(restarts=args.restarts, max_evals=args.max_evals)
        rows = phi_sweep(grid, args.chi, budget, args.seed)
        text = csv_text(["phi", "probability"], rows)
    else:
        from .noise import mu_sweep

        if args.config is None:
            from .fixtures import appendix_d_pair
            cfg, target = appendix_d_pair()
            tol = 1e-2
        else:
            cfg = load_config(args.config)
            doc = _read_json(args.config)
            if args.target is not None:
                target = build_target(args)
            elif doc.get("target"):
                target = TargetState.from_json(doc["target"])
            else:
                raise UsageError("mu sweep needs --target or a result file that records one")
            tol = args.tol
        text = csv_text(["mu", "probability", "fidelity"], mu_sweep(cfg, target, grid, tol))
    write_atomic(args.output, text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, unitary_atol=args.unitary_atol)
    state = parse_input_state(args.input, cfg.n_qubits)
    out = ideal_output(cfg, state)
    doc = {"manifest": _manifest(args, "simulate"), "output": out.to_json(),
           "success_probability": out.norm_squared()}
    write_atomic(args.output, dumps(doc))
    return EXIT_OK


def cmd_export_fixture(args) -> int:
    from .fixtures import appendix_d_config, appendix_d_target

    doc = {"config": appendix_d_config().to_json(), "target": appendix_d_target().to_json()}
    write_atomic(args.output, dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="heraldix", description="Heralded multi-qubit state preparation toolkit.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def target_args(sp, default_target=None):
        sp.add_argument("--target", default=default_target,
                        help="cluster, ghz, or a path to a target-state JSON file")
        sp.add_argument("--phi", type=parse_number, default=None, help="relative phase (accepts pi)")
        sp.add_argument("--chi", type=parse_number, default=0.0, help="cluster global phase")
        sp.add_argument("--n-qubits", type=int, default=3, help="GHZ qubit count")

    def budget_args(sp, restarts=64):
        sp.add_argument("--restarts", type=int, default=restarts)
        sp.add_argument("--max-evals", type=int, default=10_000)
        sp.add_argument("--seed", type=int, default=0)

    o = sub.add_parser("optimize", help="maximize success probability for a target")
    target_args(o, "cluster")
    budget_args(o)
    o.add_argument("--shape", default=None, help="N,K,L,M (default from the qubit count)")
    o.add_argument("--method", choices=("auto", "chain", "generic"), default="auto")
    o.add_argument("--output", default=None, help="result JSON path (default stdout)")
    o.set_defaults(func=cmd_optimize)

    v = sub.add_parser("verify", help="run a named acceptance check group")
    v.add_argument("suite", choices=("appendix-d", "oracle-suite", "loss", "measurement"))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--config", default=None, help="config for the measurement checks")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="tabulate a phi or mu sweep as CSV")
    s.add_argument("kind", choices=("phi", "mu"))
    s.add_argument("--grid", required=True, help="start:stop:count or comma list (pi allowed)")
    s.add_argument("--config", default=None, help="config or result JSON for the mu sweep")
    s.add_argument("--tol", type=float, default=1e-6, help="solved-config tolerance for the mu sweep")
    target_args(s)
    budget_args(s, restarts=16)
    s.add_argument("--output", default=None)
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("simulate", help="heralded output of a config for one input")
    m.add_argument("--config", required=True)
    m.add_argument("--input", default=None, help="bitstring such as 11, or a state JSON path")
    m.add_argument("--unitary-atol", type=float, default=1e-9)
    m.add_argument("--output", default=None)
    m.set_defaults(func=cmd_simulate)

    e = sub.add_parser("export-fixture", help="write the reference cluster config as JSON")
    e.add_argument("--output", default=None)
    e.set_defaults(func=cmd_export_fixture)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"heraldix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HeraldixError, ValueError) as exc:
        print(f"heraldix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
