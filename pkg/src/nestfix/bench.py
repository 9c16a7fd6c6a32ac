"""Iteration-count telemetry for the lifting solver on random parity games."""
from __future__ import annotations

import math
import random
import time

from . import generators
from .encodings import parity_system
from .games import zielonka_solve
from .solver import default_tree, lift_solve
from .universal import bit_budget, succinct_size, succinct_size_bound

COLUMNS = (
    "n", "d", "l", "h", "tree_size", "closed_form", "size_bound", "poly_regime",
    "poly_bound", "lift_calls", "bound", "sweeps", "evaluations", "agrees", "seconds",
)


def polynomial_bound(l: int) -> int:
    """``16 l^3``: the size bound ``2l C(beta+h+1, h)`` when ``h <= beta``."""
    return 16 * l ** 3


def bench_row(n: int, d: int, rng: random.Random) -> dict:
    game = generators.parity_game(rng, n, d)
    # pin the top priority so that the game really has alternation depth d
    prio = list(game.priority)
    prio[rng.randrange(n)] = d
    game = type(game)(game.owner, prio, game.succ)
    system = parity_system(game)
    tree = default_tree(system)
    t0 = time.perf_counter()
    res = lift_solve(system, tree)
    secs = time.perf_counter() - t0
    we, _ = zielonka_solve(game)
    l, h = tree.l, tree.h
    poly = d <= math.log2(n)
    return {
        "n": n,
        "d": d,
        "l": l,
        "h": h,
        "tree_size": tree.size,
        "closed_form": succinct_size(l, h),
        "size_bound": succinct_size_bound(l, h),
        "poly_regime": poly,
        "poly_bound": polynomial_bound(l) if poly and h <= bit_budget(l) else None,
        "lift_calls": res.stats["lift_calls"],
        "bound": res.stats["bound"],
        "sweeps": res.stats["sweeps"],
        "evaluations": res.stats["evaluations"],
        "agrees": res.solutions[-1] == sum(1 << v for v in we),
        "seconds": round(secs, 3),
    }


def benchmark(ns=(8, 16, 32), ds=(2, 4), seed: int = 0) -> list[dict]:
    rng = random.Random(seed)
    return [bench_row(n, d, rng) for n in ns for d in ds]


def format_table(rows: list[dict]) -> str:
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in COLUMNS}
    lines = ["  ".join(c.rjust(widths[c]) for c in COLUMNS)]
    for r in rows:
        lines.append("  ".join(str(r[c]).rjust(widths[c]) for c in COLUMNS))
    return "\n".join(lines)
