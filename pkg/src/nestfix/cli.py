"""Command-line interface.

Exit codes: 0 success, 1 unreadable or malformed input, 2 semantic
validation error, 3 internal size limit.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import bench
from .encodings import credits, energy_system, parity_system, prob_system
from .eqsys import SizeLimitError
from .formats import ParseError, parse_bes, parse_energy, parse_formula, parse_model, parse_pgsolver, parse_prob
from .games import GameError, zielonka_solve
from .lattice import LatticeError
from .mucalc import FormulaError, ModelError, alpha_mc
from .solver import ALGORITHMS, DEFAULT_CHAINED_CAP, SCHEDULES, solve
from .universal import TreeError

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_LIMIT = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    inputs: list
    algo: str = "lifting"
    tree: str = "succinct"
    height: int | None = None
    chained_cap: int = DEFAULT_CHAINED_CAP
    schedule: str = "forward"
    json: bool = False
    stats: bool = False
    seed: int = 0


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _solve(system, cfg: RunConfig):
    return solve(
        system,
        cfg.algo,
        flavor=cfg.tree,
        height=cfg.height,
        chained_cap=cfg.chained_cap,
        schedule=cfg.schedule,
        seed=cfg.seed,
    )


def _lift_stats(stats: dict) -> dict:
    keys = ("algo", "lift_calls", "sweeps", "tree_size", "bound", "evaluations", "triples", "updates")
    return {k: stats[k] for k in keys if k in stats}


def _sorted_ids(ids):
    return sorted(ids, key=lambda x: (str(type(x)), x))


def cmd_solve_pg(cfg: RunConfig):
    game = parse_pgsolver(_read(cfg.inputs[0]))
    if cfg.algo == "zielonka":
        we, _ = zielonka_solve(game)
        stats = {"algo": "zielonka"}
    else:
        sols, stats = _solve(parity_system(game), cfg)
        we = {v for v in game.nodes if sols[-1] >> v & 1}
    win_e = _sorted_ids(game.ids[v] for v in we)
    win_a = _sorted_ids(game.ids[v] for v in game.nodes if v not in we)
    return {"win_eloise": win_e, "win_abelard": win_a}, stats


def cmd_solve_prob(cfg: RunConfig):
    pg = parse_prob(_read(cfg.inputs[0]))
    sols, stats = _solve(prob_system(pg), cfg)
    we = {v for v in pg.nodes if sols[-1] >> v & 1}
    return {
        "win_eloise": _sorted_ids(pg.ids[v] for v in we),
        "win_abelard": _sorted_ids(pg.ids[v] for v in pg.nodes if v not in we),
    }, stats


def cmd_solve_energy(cfg: RunConfig):
    eg = parse_energy(_read(cfg.inputs[0]))
    b = eg.b
    sols, stats = _solve(energy_system(eg), cfg)
    cr = credits(sols[-1], b)
    g = eg.game
    return {
        "bound": b,
        "credits": {str(g.ids[v]): cr[v] for v in g.nodes},
        "win_eloise": _sorted_ids(g.ids[v] for v in g.nodes if cr[v] <= b),
        "win_abelard": _sorted_ids(g.ids[v] for v in g.nodes if cr[v] > b),
    }, stats


def cmd_mc(cfg: RunConfig):
    model = parse_model(_read(cfg.inputs[0]))
    text = cfg.inputs[1]
    if text.startswith("@"):
        text = _read(text[1:])
    chi = parse_formula(text, closed=True)
    prob = alpha_mc(model, chi)
    sols, stats = _solve(prob.system, cfg)
    holds = prob.truth_set(sols[-1])
    return {
        "formula": str(chi),
        "holds": model.members(holds),
        "fails": model.members(model.full & ~holds),
    }, stats


def cmd_solve_bes(cfg: RunConfig):
    bes = parse_bes(_read(cfg.inputs[0]))
    sols, stats = _solve(bes.to_system(), cfg)
    return {"values": {n: bool(x) for n, x in zip(bes.names, sols)}}, stats


COMMANDS = {
    "solve-pg": cmd_solve_pg,
    "solve-energy": cmd_solve_energy,
    "solve-prob": cmd_solve_prob,
    "mc": cmd_mc,
    "solve-bes": cmd_solve_bes,
}


def _render_text(result: dict) -> str:
    lines = []
    for key, val in result.items():
        if isinstance(val, dict):
            lines.append(f"{key}:")
            lines += [f"  {k}: {v}" for k, v in val.items()]
        elif isinstance(val, list):
            lines.append(f"{key}: {' '.join(str(x) for x in val)}".rstrip())
        else:
            lines.append(f"{key}: {val}")
    return "\n".join(lines)


def run(cfg: RunConfig, out=None, err=None) -> int:
    """Execute one command; returns the exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        if cfg.command == "bench":
            rows = bench.benchmark(seed=cfg.seed)
            if cfg.json:
                out.write(json.dumps(rows) + "\n")
            else:
                out.write(bench.format_table(rows) + "\n")
            return EXIT_OK
        result, stats = COMMANDS[cfg.command](cfg)
    except (ParseError, json.JSONDecodeError, UnicodeDecodeError) as e:
        err.write(f"parse error: {e}\n")
        return EXIT_PARSE
    except OSError as e:
        err.write(f"cannot read input: {e}\n")
        return EXIT_PARSE
    except SizeLimitError as e:
        err.write(f"limit exceeded: {e}\n")
        return EXIT_LIMIT
    except (GameError, ModelError, FormulaError, LatticeError, TreeError, ValueError) as e:
        err.write(f"invalid input: {e}\n")
        return EXIT_SEMANTIC
    stats = _lift_stats(stats)
    if cfg.json:
        payload = {"result": result, "stats": stats}
        out.write(json.dumps(payload) + "\n")
    else:
        out.write(_render_text(result) + "\n")
        if cfg.stats:
            out.write(_render_text({"stats": stats}) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nestfix", description="Solve nested fixpoint equation systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--algo", choices=ALGORITHMS, default="lifting")
        sp.add_argument("--tree", choices=("succinct", "complete"), default="succinct")
        sp.add_argument("--height", type=int, default=None, help="tree height (default: ceil(d/2))")
        sp.add_argument("--chained-cap", type=int, default=DEFAULT_CHAINED_CAP)
        sp.add_argument("--schedule", choices=SCHEDULES, default="forward")
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--stats", action="store_true")
        sp.add_argument("--seed", type=int, default=0)

    for name, help_ in (
        ("solve-pg", "solve a PGSolver parity game"),
        ("solve-energy", "minimal initial credits of an energy parity game"),
        ("solve-prob", "winning regions of a probabilistic parity game"),
        ("solve-bes", "solve a Boolean equation system"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input")
        common(sp)
    sp = sub.add_parser("mc", help="model check a closed formula (text, or @file)")
    sp.add_argument("model")
    sp.add_argument("formula")
    common(sp)
    sp = sub.add_parser("bench", help="lifting telemetry on random parity games")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "mc":
        inputs = [args.model, args.formula]
    elif args.command == "bench":
        inputs = []
    else:
        inputs = [args.input]
    cfg = RunConfig(args.command, inputs, json=args.json, seed=args.seed)
    if args.command != "bench":
        cfg.algo = args.algo
        cfg.tree = args.tree
        cfg.height = args.height
        cfg.chained_cap = args.chained_cap
        cfg.schedule = args.schedule
        cfg.stats = args.stats
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
