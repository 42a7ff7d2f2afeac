"""``hiercode analyze | simulate | sweep``.

Exit codes: 0 success, 1 bad configuration or I/O, 2 infeasible topology,
3 internal assertion (gap, equivalence or decoding failure).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .allocation import AllocationError, round_allocations
from .analysis import (
    GapViolation,
    TimingModel,
    achievable_loads,
    equal_split_upper_bound,
    gap_certificates,
    literal_down_load,
    lower_bounds,
    timing,
    uncoded_loads,
)
from .coding import CodingError
from .learner import LearnerConfig, RidgeLearner, SyntheticLearner, load_datasets, random_ridge_problem
from .protocol import ConsensusViolation, EquivalenceViolation, TrainingConfig, run_training
from .simplex import LPError
from .sweep import Scenario, run_sweep, write_csv
from .topology import Topology, TopologyError, connectivity_profile, load_topology

EXIT_CONFIG, EXIT_TOPOLOGY, EXIT_INTERNAL = 1, 2, 3


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _scenario(args) -> Scenario:
    d = Fraction(args.d) if args.d is not None else None
    return Scenario(gen=args.gen, K=args.K, H=args.H, r=args.r, d=d, eta=args.eta)


def resolve_topology(args) -> Topology:
    if args.topology:
        try:
            return load_topology(args.topology)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read topology: {exc}") from None
    if not args.gen:
        raise ConfigError("give --topology FILE or --gen")
    sc = _scenario(args)
    needed = {"random": ("K", "H", "r"), "hetero": ("K", "d"), "combination": ("H", "r")}[args.gen]
    missing = [f"--{n}" for n in needed if getattr(sc, n) is None]
    if missing:
        raise ConfigError(f"--gen {args.gen} needs {' '.join(missing)}")
    return sc.build(args.seed)


def _timing_model(args) -> TimingModel:
    return TimingModel(Fraction(args.w1), Fraction(args.w2), Fraction(args.vbits), Fraction(args.tcomp))


def _rational_list(xs) -> list[str]:
    return [str(x) for x in xs]


def analyze_report(t: Topology, model: TimingModel) -> dict:
    profile = connectivity_profile(t)
    allocs = round_allocations(t, profile)
    ach = achievable_loads(t, profile, allocs)
    lb = lower_bounds(t, profile)
    gaps = gap_certificates(t, profile, ach)
    base = uncoded_loads(t)
    K = Fraction(t.K)
    coded_t = timing((K, ach.up, ach.down, K), model)
    base_t = timing((K, base.up, base.down, K), model)
    return {
        "topology": t.to_dict(),
        "profile": {
            "r_k": list(profile.r_k),
            "r": str(profile.r),
            "I": {str(z): sorted(u) for z, u in profile.I.items()},
        },
        "allocations": {
            str(z): {
                "alpha": _rational_list(a.alpha),
                "n": list(a.n),
                "alpha_grid": str(a.alpha_grid),
                "objective": str(a.objective),
            }
            for z, a in allocs.items()
        },
        "up": str(ach.up),
        "down": str(ach.down),
        "down_literal": str(literal_down_load(t, profile)),
        "up_lb": str(lb.up),
        "down_lb": str(lb.down),
        "uncoded": base.as_json(),
        "gaps": gaps.as_json(),
        "equal_split_bound": str(equal_split_upper_bound(t, profile)),
        "timing": {
            "coded": {k: str(v) for k, v in coded_t.items()},
            "uncoded": {k: str(v) for k, v in base_t.items()},
        },
    }


def simulate_report(t: Topology, args) -> dict:
    if args.iters < 0:
        raise ConfigError("--iters must be non-negative")
    if args.learner == "synthetic":
        if args.vsym <= 0:
            raise ConfigError("--vsym must be positive")
        learner = SyntheticLearner(t.K, args.vsym, args.seed)
    elif args.data:
        try:
            datasets = load_datasets(args.data)
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read datasets: {exc}") from None
        import numpy as np

        learner = RidgeLearner(datasets, LearnerConfig.from_real(0.1, 0.01, 0.5, np.eye(len(datasets))))
    else:
        learner = random_ridge_problem(t.K, args.vsym, points=8, seed=args.seed)
    profile = connectivity_profile(t)
    closed = achievable_loads(t, profile, round_allocations(t, profile))
    report = run_training(TrainingConfig(t, learner, args.iters, args.seed))
    out = report.as_json()
    out["closed_form"] = closed.as_json()
    out["measured_matches_closed_form"] = all(
        (r.relay_to_server, r.server_to_relay) == (closed.up, closed.down) for r in report.iterations
    )
    out["learner"] = args.learner
    return out


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hiercode", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--topology", metavar="FILE")
    common.add_argument("--gen", choices=["combination", "random", "hetero"])
    common.add_argument("--H", type=int)
    common.add_argument("--K", type=int)
    common.add_argument("--r", type=int)
    common.add_argument("--eta", type=int, default=1)
    common.add_argument("--d", type=str, help="heterogeneity, e.g. 0.1 or 1/10")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--w1", type=str, default="100000000", help="user-relay bandwidth, bit/s")
    common.add_argument("--w2", type=str, default="100000000", help="relay-server bandwidth, bit/s")
    common.add_argument("--vbits", type=str, default="1000000", help="IV size in bits for timing")
    common.add_argument("--tcomp", type=str, default="0")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=["json", "csv"])

    sub.add_parser("analyze", parents=[common], help="closed-form loads and bounds")
    sim = sub.add_parser("simulate", parents=[common], help="run the coded protocol")
    sim.add_argument("--iters", type=int, default=1)
    sim.add_argument("--vsym", type=int, default=8, help="IV length in field symbols")
    sim.add_argument("--learner", choices=["synthetic", "ridge"], default="synthetic")
    sim.add_argument("--data", metavar="FILE", help="ridge datasets JSON")
    sim.add_argument("--log", metavar="PATH", help="write wire-format messages of the first iteration")
    sw = sub.add_parser("sweep", parents=[common], help="CSV sweep over K, d or r")
    sw.add_argument("--axis", choices=["K", "d", "r"], required=True)
    sw.add_argument("--values", default="", help="comma-separated axis values")
    sw.add_argument("--seeds", type=int, default=10)
    return p


def _main(args) -> int:
    model = _timing_model(args)
    if args.command == "analyze":
        t = resolve_topology(args)
        _write(json.dumps(analyze_report(t, model), indent=2) + "\n", args.out)
    elif args.command == "simulate":
        t = resolve_topology(args)
        report = simulate_report(t, args)
        if args.log:
            _write_log(t, args)
        _write(json.dumps(report, indent=2) + "\n", args.out)
    else:
        if args.format == "json":
            raise ConfigError("sweep writes CSV only")
        if not args.gen:
            raise ConfigError("sweep needs --gen")
        values = [v for v in args.values.split(",") if v.strip()]
        if not values:
            raise ConfigError("empty sweep axis")
        if args.seeds < 1:
            raise ConfigError("--seeds must be positive")
        base = _scenario(args)
        try:
            rows = run_sweep(base, args.axis, values, range(args.seed, args.seed + args.seeds), model)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, TopologyError):
                raise
            raise ConfigError(str(exc)) from None
        if args.out:
            with open(args.out, "w", newline="") as fh:
                write_csv(rows, fh)
        else:
            write_csv(rows, sys.stdout)
    return 0


def _write_log(t: Topology, args) -> None:
    from .protocol import SystemState, run_iteration

    learner = SyntheticLearner(t.K, max(args.vsym, 1), args.seed)
    log: list = []
    run_iteration(SystemState(t, learner, args.seed), log=log)
    with open(args.log, "w") as fh:
        for msg in log:
            fh.write(json.dumps(msg) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _main(args)
    except TopologyError as exc:
        print(f"hiercode: infeasible topology: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except ConfigError as exc:
        print(f"hiercode: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"hiercode: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GapViolation, EquivalenceViolation, ConsensusViolation, CodingError, LPError, AllocationError, AssertionError) as exc:
        print(f"hiercode: internal check failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
