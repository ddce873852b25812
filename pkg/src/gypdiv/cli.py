"""Command-line front end.

    gypdiv div    --pair PAIR.json --generator kl
    gypdiv bound  --pair PAIR.json --generator kl --cuts 0.5,1,2
    gypdiv gyp    --pair PAIR.json --generator kl --epsilon 1e-3
    gypdiv sweep  --pair PAIR.json --generator kl --epsilons 1e-1,1e-2,1e-3
    gypdiv brute  --pair PAIR.json --generator chi2
    gypdiv detect --pair PAIR.json --generator kl --M 5 --n-max 100000

Exit status: 0 on success, 1 on validation or domain errors, 2 when an
accuracy or size guard trips.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

from .divergence import divergence, renyi
from .errors import (
    AccuracyError,
    DomainError,
    InfiniteDivergenceError,
    SizeGuardError,
)
from .generator import builtin_generator
from .gyp import convergence_sweep, detect_infinite, gyp_approximate
from .measure import load_pair
from .partition import Partition, brute_force_supremum, partition_divergence, renyi_partition_bound

COMMANDS = ("div", "bound", "gyp", "sweep", "brute", "detect")
SWEEP_HEADER = ("epsilon", "m_cells", "lower_bound", "gap")


@dataclass
class RunConfig:
    command: str
    pair_path: str
    generator_name: str
    alpha: Optional[float] = None
    epsilon: Optional[float] = None
    epsilons: list = field(default_factory=list)
    cuts: Optional[list] = None
    M: Optional[float] = None
    n_max: Optional[int] = None
    output: Optional[str] = None
    format: str = "text"

    def validate(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.format not in ("text", "csv", "json"):
            raise DomainError(f"unknown format {self.format!r}")
        if self.command == "gyp" and (self.epsilon is None or not self.epsilon > 0):
            raise DomainError("gyp needs --epsilon > 0")
        if self.command == "sweep" and (not self.epsilons or any(not e > 0 for e in self.epsilons)):
            raise DomainError("sweep needs --epsilons with positive values")
        if self.command == "bound" and self.cuts is None:
            raise DomainError("bound needs --cuts (use \"\" for the trivial partition)")
        if self.command == "detect":
            if self.M is None or not self.M > 0:
                raise DomainError("detect needs --M > 0")
            if self.n_max is None or self.n_max < 1:
                raise DomainError("detect needs --n-max >= 1")


def fmt(x):
    """17 significant digits; infinities as ``inf``."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return {"extended": "+inf" if x > 0 else "-inf"}
    return x


def _parse_floats(text, what):
    text = (text or "").strip()
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise DomainError(f"cannot parse {what} {text!r}") from None


def _resolve_generator(name, alpha):
    """Return (generator or None, renyi order or None)."""
    name = name.strip()
    if name.startswith("renyi"):
        order = alpha
        if ":" in name:
            try:
                order = float(name.split(":", 1)[1])
            except ValueError:
                raise DomainError(f"bad Renyi order in {name!r}") from None
        if order is None:
            raise DomainError("Renyi divergence needs an order (renyi:<alpha> or --alpha)")
        return None, order
    if name == "tsallis" and alpha is not None:
        name = f"tsallis:{alpha}"
    return builtin_generator(name), None


def _records(config):
    """Compute the report as (columns, rows)."""
    pair = load_pair(config.pair_path)
    gen, renyi_order = _resolve_generator(config.generator_name, config.alpha)
    cmd = config.command
    if renyi_order is not None and cmd not in ("div", "bound"):
        raise DomainError("Renyi divergences are only available for div and bound")

    if cmd == "div":
        value = renyi(renyi_order, pair) if gen is None else divergence(gen, pair)
        return ("value", "error_bound"), [(value.value, value.error_bound)]
    if cmd == "bound":
        part = Partition.from_cuts(config.cuts)
        if gen is None:
            return ("value", "m_cells"), [(renyi_partition_bound(renyi_order, pair, part), len(part))]
        return ("value", "m_cells"), [(partition_divergence(gen, pair, part).value, len(part))]
    if cmd == "gyp":
        res = gyp_approximate(gen, pair, config.epsilon)
        values = {**res.to_dict(), "lower_bound": res.lower_bound,
                  "reference": res.reference.value, "gap": res.gap}
        return tuple(values), [tuple(values.values())]
    if cmd == "sweep":
        rows = convergence_sweep(gen, pair, config.epsilons)
        return SWEEP_HEADER, [(r.epsilon, r.m_cells, r.lower_bound, r.gap) for r in rows]
    if cmd == "brute":
        res = brute_force_supremum(gen, pair)
        blocks = "|".join(" ".join(str(i) for i in b) for b in res.argmax)
        return ("value", "n_partitions", "argmax"), [(res.value, res.n_partitions, blocks)]
    if cmd == "detect":
        ev = detect_infinite(gen, pair, config.M, config.n_max)
        return (("exceeded", "total", "target", "n_used", "n_cells"),
                [(ev.exceeded, ev.total, ev.target, ev.n_used, len(ev.cells))])
    raise DomainError(f"unknown command {cmd!r}")


def render(columns, rows, format):
    if format == "json":
        out = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(out[0] if len(out) == 1 else out, indent=2) + "\n"
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
        return buf.getvalue()
    if len(rows) == 1:
        width = max(len(c) for c in columns)
        return "".join(f"{c:<{width}}  {v if isinstance(v, str) else fmt(v)}\n"
                       for c, v in zip(columns, rows[0]))
    lines = ["  ".join(columns)]
    lines += ["  ".join(v if isinstance(v, str) else fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def run(config, stdout=None, stderr=None):
    """Execute one command; return the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        config.validate()
        columns, rows = _records(config)
        text = render(columns, rows, config.format)
    except (AccuracyError, SizeGuardError, InfiniteDivergenceError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    if config.output:
        with open(config.output, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="gypdiv", description="f-divergences and partition lower bounds")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "div": "divergence value",
        "bound": "partition divergence for a cut list",
        "gyp": "epsilon-tight partition certificate",
        "sweep": "certificates for several epsilons (CSV-ready)",
        "brute": "brute-force supremum over set partitions",
        "detect": "evidence that a divergence is infinite",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--pair", required=True, help="JSON pair file")
        p.add_argument("--generator", required=True,
                       help="kl, tv, chi2, hellinger, tsallis:<alpha> (renyi:<alpha> for div/bound)")
        p.add_argument("--alpha", type=float, help="order for 'tsallis' or 'renyi'")
        p.add_argument("--output", "-o", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("text", "csv", "json"),
                       default="csv" if name == "sweep" else "text")
        if name == "bound":
            p.add_argument("--cuts", required=True, help="comma-separated cut points; \"\" for none")
        if name == "gyp":
            p.add_argument("--epsilon", type=float, required=True)
        if name == "sweep":
            p.add_argument("--epsilons", required=True, help="comma-separated epsilons")
        if name == "detect":
            p.add_argument("--M", type=float, required=True, help="target the partial sums must beat")
            p.add_argument("--n-max", type=int, default=100000, help="maximum number of rounds")
    return parser


def config_from_args(args):
    return RunConfig(
        command=args.command,
        pair_path=args.pair,
        generator_name=args.generator,
        alpha=args.alpha,
        epsilon=getattr(args, "epsilon", None),
        epsilons=_parse_floats(getattr(args, "epsilons", None), "epsilons"),
        cuts=_parse_floats(args.cuts, "cuts") if getattr(args, "cuts", None) is not None else None,
        M=getattr(args, "M", None),
        n_max=getattr(args, "n_max", None),
        output=args.output,
        format=args.format,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
