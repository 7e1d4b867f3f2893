"""Command-line interface: eval, optimize, search, train, sweep.

Exit codes: 0 success, 2 bad input (flags or circuit file), 3 impossible herald.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import CompiledCircuit, EvalResult
from .env import STRATEGIES, BellEnv, EnvConfig, random_search
from .herald import IMPOSSIBLE_PROBABILITY, HeraldScheme
from .io import (FORMAT_VERSION, CircuitFileError, circuit_to_dict, read_circuit,
                 sweep_to_csv, write_circuit)
from .optimize import (HeraldInfeasible, OptimizationInfeasible, OptimizeConfig, maximize_chsh,
                       maximize_herald_prob, sweep_distance, sweep_efficiency)
from .ppo import PpoAgent, PpoConfig, hidden_sizes_for, load_checkpoint, save_checkpoint, train

log = logging.getLogger("hombell")

EXIT_OK, EXIT_INPUT, EXIT_HERALD = 0, 2, 3


class HeraldFailed(RuntimeError):
    pass


def _emit(report: dict, out) -> None:
    text = json.dumps(report, indent=2)
    print(text)
    if out:
        Path(out).write_text(text + "\n")


def _evaluate(circuit, meas) -> EvalResult:
    res = CompiledCircuit(circuit, meas, threshold=IMPOSSIBLE_PROBABILITY)(circuit.params)
    if not res.heralded:
        raise HeraldFailed(f"heralding probability {res.herald_probability:.3g} is zero "
                           f"to working precision")
    return res


def _report(circuit, res: EvalResult, seed: int, **extra) -> dict:
    e = dict(zip(("E00", "E01", "E10", "E11"), res.correlators))
    return {"format": FORMAT_VERSION, "seed": seed, "chsh": res.chsh,
            "herald_probability": res.herald_probability, "correlators": e,
            "squeezing_db": circuit.squeezing_db(), "reliable": res.reliable, **extra}


def cmd_eval(args) -> int:
    circuit, meas = read_circuit(args.circuit)
    res = _evaluate(circuit, meas)
    _emit(_report(circuit, res, args.seed), args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    circuit, meas = read_circuit(args.circuit)
    config = OptimizeConfig(squeeze_cap_db=args.cap_db, seed=args.seed)
    before = _evaluate(circuit, meas) if circuit.gates else None
    best, _ = maximize_chsh(circuit, meas, config)
    if args.herald_floor is not None:
        start = best if before is None or before.chsh < args.herald_floor - 1e-3 else circuit
        best, _ = maximize_herald_prob(start, meas, args.herald_floor, config)
    res = _evaluate(best, meas)
    if before is not None and np.allclose(best.params, circuit.params, atol=1e-12):
        log.warning("objective is flat around the input; parameters unchanged")
    out = Path(args.write) if args.write else Path(args.circuit).with_suffix(".optimized.json")
    write_circuit(out, best, meas)
    _emit(_report(best, res, args.seed, circuit_file=str(out)), args.out)
    return EXIT_OK


def _env_config(args) -> EnvConfig:
    return EnvConfig(n_modes=args.modes, n_circuit=args.depth, strategy=args.strategy,
                     herald_scheme=HeraldScheme.parse(args.herald_scheme), eta=args.eta,
                     optimize=OptimizeConfig(simplex_tolerance=1e-4, seed=args.seed))


def _record_dict(rec) -> dict:
    return {"actions": list(rec.actions), "chsh": rec.chsh,
            "herald_probability": rec.herald_probability, "reward": rec.reward,
            "circuit": circuit_to_dict(rec.circuit)}


def cmd_search(args) -> int:
    config = _env_config(args)
    records = random_search(args.strategy, config, args.episodes, args.seed)
    report = {"format": FORMAT_VERSION, "seed": args.seed, "strategy": args.strategy,
              "n_modes": args.modes, "depth": args.depth, "episodes": args.episodes,
              "results": [_record_dict(r) for r in records[:args.top]]}
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    best = records[0]
    print(json.dumps({"seed": args.seed, "best_chsh": best.chsh,
                      "best_circuit": str(best.circuit)}, indent=2))
    return EXIT_OK


def cmd_train(args) -> int:
    config = _env_config(args)
    env = BellEnv(config)
    if args.resume:
        agent = load_checkpoint(args.resume)
    else:
        hidden = tuple(args.hidden) if args.hidden else hidden_sizes_for(args.modes)
        ppo = PpoConfig(hidden_sizes=hidden, learning_rate=args.lr,
                        update_frequency=args.update_frequency,
                        trajectory_capacity=args.capacity, seed=args.seed)
        agent = PpoAgent(env.observation_size, env.n_actions, ppo)
    result = train(env, agent.config, args.episodes, agent)
    if args.checkpoint:
        save_checkpoint(args.checkpoint, agent)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["episode", "chsh", "best_so_far", "reward"])
            best = -np.inf
            for i, (c, r) in enumerate(zip(result.trace, result.rewards)):
                best = max(best, c)
                w.writerow([i, f"{c:.17g}", f"{best:.17g}", f"{r:.17g}"])
    summary = {"format": FORMAT_VERSION, "seed": args.seed, "episodes": len(result.trace)}
    if result.best is not None:
        summary.update(best_chsh=result.best.chsh, best_circuit=str(result.best.circuit))
        if args.out:
            write_circuit(args.out, result.best.circuit)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_sweep(args) -> int:
    circuit, meas = read_circuit(args.circuit)
    if args.kind == "distance":
        config = OptimizeConfig(squeeze_cap_db=args.cap_db, seed=args.seed)
        sweep = sweep_distance(circuit, meas, args.km_max, args.km_step, config,
                               reoptimize=not args.fixed, optimize_angles=args.optimize_angles)
    else:
        sweep = sweep_efficiency(circuit, meas, args.etas)
    text = sweep_to_csv(sweep)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hombell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="also write the report/results to this path")

    p = sub.add_parser("eval", help="evaluate a circuit file")
    p.add_argument("circuit")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="maximize CHSH (and optionally heralding probability)")
    p.add_argument("circuit")
    p.add_argument("--cap-db", type=float, default=10.0)
    p.add_argument("--herald-floor", type=float, default=None)
    p.add_argument("--write", help="optimized circuit path (default: <input>.optimized.json)")
    common(p)
    p.set_defaults(func=cmd_optimize)

    def search_flags(p):
        p.add_argument("--strategy", type=int, choices=sorted(STRATEGIES), default=3)
        p.add_argument("--modes", type=int, choices=(4, 6), default=4)
        p.add_argument("--depth", type=_positive_int, default=5,
                       help="total gate count, initial gates included")
        p.add_argument("--episodes", type=_positive_int, default=100)
        p.add_argument("--herald-scheme", choices=("click", "single_photon", "cl", "sp"),
                       default="click")
        p.add_argument("--eta", type=float, default=1.0)
        common(p)

    p = sub.add_parser("search", help="random circuit search")
    search_flags(p)
    p.add_argument("--top", type=_positive_int, default=20, help="records kept in --out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("train", help="PPO agent training")
    search_flags(p)
    p.add_argument("--hidden", type=int, nargs=2)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--update-frequency", type=_positive_int, default=64)
    p.add_argument("--capacity", type=_positive_int, default=256)
    p.add_argument("--checkpoint", help="write the agent here when done")
    p.add_argument("--resume", help="continue from this checkpoint")
    p.add_argument("--trace", help="per-episode CSV trace")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="distance or efficiency sweep, CSV output")
    p.add_argument("circuit")
    p.add_argument("--kind", choices=("distance", "efficiency"), required=True)
    p.add_argument("--km-max", type=float, default=12.0)
    p.add_argument("--km-step", type=float, default=0.1)
    p.add_argument("--cap-db", type=float, default=10.0)
    p.add_argument("--fixed", action="store_true", help="do not re-optimize per distance")
    p.add_argument("--optimize-angles", action="store_true")
    p.add_argument("--etas", type=float, nargs="+",
                   default=[0.05, 0.1, 0.25, 0.5, 0.75, 1.0])
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CircuitFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (HeraldFailed, HeraldInfeasible) as exc:
        print(f"herald impossible: {exc}", file=sys.stderr)
        return EXIT_HERALD
    except (OptimizationInfeasible, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
