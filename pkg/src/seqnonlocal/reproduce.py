"""Pinned battery of published values, each with its own tolerance."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

from .protocol import analytic_chain, evaluate, paper_scenario
from .search import PAPER_ANGLES, SearchSpec, max_observers, optimize, sharpness_window


@dataclass
class ReproItem:
    name: str
    expected: object
    computed: object
    deviation: float
    tolerance: float
    passed: bool
    seconds: float = 0.0
    note: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _Case:
    name: str
    slow: bool
    run: Callable[["_Ctx"], list[ReproItem]]


@dataclass
class _Ctx:
    seed: int
    budget: int
    restarts: int
    observer_budget: int


def _scalar(name, expected, computed, tol, note="") -> ReproItem:
    dev = abs(computed - expected)
    return ReproItem(name, expected, computed, dev, tol, dev <= tol, note=note)


def _sharp_maxima(ctx):
    m = evaluate(paper_scenario("mermin", [1.0])).rows[0].mermin
    s = evaluate(paper_scenario("svetlichny", [1.0])).rows[0].svetlichny
    return [
        _scalar("ghz_mermin_sharp_max", 4.0, m, 1e-9),
        _scalar("ghz_svetlichny_sharp_max", 4 * math.sqrt(2), s, 1e-9),
    ]


def _spec(ctx, kind, thresholds, mode="free"):
    return SearchSpec(kind, "GHZ", len(thresholds) + 1, thresholds, mode, ctx.budget, ctx.restarts, ctx.seed)


def _mermin_two(ctx):
    res = optimize(_spec(ctx, "mermin", [2.10]))
    alt = evaluate(paper_scenario("mermin", [0.52, 1.0])).values("mermin")
    note = f"at lambda_1 = 0.52 instead: M1 = {alt[0]:.4f}, M2 = {alt[1]:.4f}"
    return [
        _scalar("M2_two_charlie_optimum", 3.70, res.best_value, 0.01),
        _scalar("M1_two_charlie", 2.10, res.values[0], 0.01),
        _scalar("lambda1_two_charlie_mermin", 0.525, res.lambdas[0], 0.01, note),
    ]


def _mermin_three(ctx):
    res = optimize(_spec(ctx, "mermin", [2.10, 2.10]))
    return [
        _scalar("M3_three_charlie_optimum", 3.38, res.best_value, 0.01),
        _scalar("lambda2_three_charlie_mermin", 0.57, res.lambdas[1], 0.01),
    ]


def _mermin_chains(ctx):
    _, m205 = analytic_chain("mermin", [2.05] * 6)
    _, m200 = analytic_chain("mermin", [2.00] * 6)
    sim205 = optimize(_spec(ctx, "mermin", [2.05] * 6, PAPER_ANGLES))
    sim200 = optimize(_spec(ctx, "mermin", [2.00] * 6, PAPER_ANGLES))
    return [
        _scalar("M7_at_2.05_thresholds", 1.49, m205, 0.01),
        _scalar("M7_at_2.00_thresholds", 1.76, m200, 0.01),
        _scalar("M7_at_2.05_thresholds_simulated", 1.49, sim205.best_value, 0.01),
        _scalar("M7_at_2.00_thresholds_simulated", 1.76, sim200.best_value, 0.01),
    ]


def _svetlichny_two(ctx):
    res = optimize(_spec(ctx, "svetlichny", [4.20]))
    return [
        _scalar("S2_two_charlie_optimum", 4.72, res.best_value, 0.01),
        _scalar("lambda1_two_charlie_svetlichny", 0.742, res.lambdas[0], 0.01),
    ]


def _window(ctx):
    lo, hi = sharpness_window("svetlichny")
    rounded = [round(lo, 2), round(hi, 2)]
    dev = max(abs(lo - 0.7071), abs(hi - 0.9102))
    return [
        ReproItem(
            "svetlichny_window",
            [0.71, 0.91],
            [lo, hi],
            dev,
            0.005,
            dev <= 0.005 and rounded == [0.71, 0.91],
            note=f"rounded {rounded}",
        )
    ]


def _svetlichny_three(ctx):
    _, s420 = analytic_chain("svetlichny", [4.20, 4.20])
    res420 = optimize(_spec(ctx, "svetlichny", [4.20, 4.20], PAPER_ANGLES))
    res400 = optimize(_spec(ctx, "svetlichny", [4.00, 4.00], PAPER_ANGLES))
    note = "thresholds read as S1 = S2 = 4; a stated value of 2 is inconsistent with lambdas (0.71, 0.83)"
    return [
        _scalar("S3_at_4.20_thresholds", 3.44, s420, 0.01),
        _scalar("S3_at_4.20_thresholds_simulated", 3.44, res420.best_value, 0.01),
        _scalar("S3_at_4.00_thresholds", 3.77, res400.best_value, 0.01, note),
        _scalar("lambda1_three_charlie_svetlichny", 0.71, res400.lambdas[0], 0.01),
        _scalar("lambda2_three_charlie_svetlichny", 0.83, res400.lambdas[1], 0.01),
    ]


def _count(name, kind, state, expected):
    def run(ctx):
        t = time.perf_counter()
        got = max_observers(kind, state, budget=ctx.observer_budget, restarts=ctx.restarts, seed=ctx.seed)
        item = ReproItem(name, expected, got, abs(got - expected), 0, got == expected)
        item.seconds = time.perf_counter() - t
        return [item]

    return run


CASES = (
    _Case("sharp_maxima", False, _sharp_maxima),
    _Case("mermin_two_charlies", False, _mermin_two),
    _Case("mermin_three_charlies", False, _mermin_three),
    _Case("mermin_chains", False, _mermin_chains),
    _Case("svetlichny_two_charlies", False, _svetlichny_two),
    _Case("svetlichny_window", False, _window),
    _Case("svetlichny_three_charlies", False, _svetlichny_three),
    _Case("mermin_ghz_max_observers", True, _count("mermin_ghz_max_observers", "mermin", "GHZ", 6)),
    _Case("svetlichny_ghz_max_observers", True, _count("svetlichny_ghz_max_observers", "svetlichny", "GHZ", 2)),
    _Case("mermin_w_max_observers", True, _count("mermin_w_max_observers", "mermin", "W", 3)),
    _Case("svetlichny_w_max_observers", True, _count("svetlichny_w_max_observers", "svetlichny", "W", 1)),
)


def run_battery(
    seed: int = 0,
    budget: int = 200_000,
    restarts: int = 64,
    observer_budget: int = 100_000,
    skip_slow: bool = False,
    only: list[str] | None = None,
    progress: Callable[[ReproItem], None] | None = None,
) -> list[ReproItem]:
    ctx = _Ctx(seed, budget, restarts, observer_budget)
    items = []
    for case in CASES:
        if only and case.name not in only:
            continue
        if skip_slow and case.slow:
            continue
        t = time.perf_counter()
        out = case.run(ctx)
        elapsed = time.perf_counter() - t
        for item in out:
            if not item.seconds:
                item.seconds = elapsed / len(out)
            items.append(item)
            if progress:
                progress(item)
    return items


def case_names() -> list[str]:
    return [c.name for c in CASES]
