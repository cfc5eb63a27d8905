"""Randomised consistency checks between the evaluation routes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .measure import BlochDirection, Sharpness
from .protocol import (
    Charlie,
    InitialState,
    PartySettings,
    ScenarioConfig,
    correlation_tables,
    heisenberg_values,
    evaluate,
    oracle_correlation_table,
    oracle_joint_distribution,
    chain_values,
    paper_scenario,
    post_states,
)
from .qcore import pure_state


def random_direction(rng: np.random.Generator) -> BlochDirection:
    v = rng.normal(size=3)
    return BlochDirection.from_vector(v)


def random_settings(rng: np.random.Generator) -> PartySettings:
    return PartySettings(random_direction(rng), random_direction(rng))


def random_state(rng: np.random.Generator) -> InitialState:
    pick = rng.integers(3)
    if pick == 0:
        return InitialState.ghz()
    if pick == 1:
        return InitialState.w()
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    return InitialState.custom(pure_state(amps))


def random_config(rng: np.random.Generator, n_max: int = 3) -> ScenarioConfig:
    n = int(rng.integers(1, n_max + 1))
    lams = list(rng.uniform(0.05, 1.0, size=n - 1)) + [1.0]
    charlies = tuple(Charlie(random_settings(rng), Sharpness(float(l))) for l in lams)
    return ScenarioConfig(random_state(rng), random_settings(rng), random_settings(rng), charlies)


@dataclass
class CheckReport:
    name: str
    draws: int
    max_deviation: float
    tolerance: float
    offenders: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance and not self.offenders


def oracle_equivalence(rng: np.random.Generator, draws: int = 50, tol: float = 1e-12) -> CheckReport:
    """Recursion vs path enumeration vs Bloch-map route, plus normalisation."""
    worst = 0.0
    offenders = []
    for d in range(draws):
        cfg = random_config(rng)
        tables = correlation_tables(cfg)
        dev = 0.0
        for t in tables:
            o = oracle_correlation_table(cfg, t.m)
            dev = max(dev, max(abs(a - b) for a, b in zip(t.as_list(), o.as_list())))
        for kind in ("mermin", "svetlichny"):
            dev = max(dev, float(np.max(np.abs(np.array(evaluate(cfg).values(kind)) - heisenberg_values(cfg, kind)))))
        for choice in itertools.product((0, 1), repeat=cfg.n + 2):
            dev = max(dev, abs(sum(oracle_joint_distribution(cfg, choice).values()) - 1.0))
        post_states(cfg, validate=True)
        worst = max(worst, dev)
        if dev > tol:
            offenders.append((d, dev))
    return CheckReport("oracle_equivalence", draws, worst, tol, offenders)


def _ab_marginal(cfg: ScenarioConfig, choice) -> np.ndarray:
    out = np.zeros((2, 2))
    for outcome, p in oracle_joint_distribution(cfg, choice).items():
        out[(1 - outcome[0]) // 2, (1 - outcome[1]) // 2] += p
    return out


def no_signalling(rng: np.random.Generator, draws: int = 50, tol: float = 1e-12) -> CheckReport:
    """Alice/Bob joint marginal must not depend on any Charlie's setting index."""
    worst = 0.0
    offenders = []
    for d in range(draws):
        cfg = random_config(rng)
        for i, j in itertools.product((0, 1), repeat=2):
            margs = [_ab_marginal(cfg, (i, j) + ks) for ks in itertools.product((0, 1), repeat=cfg.n)]
            dev = max(float(np.max(np.abs(m - margs[0]))) for m in margs)
            worst = max(worst, dev)
            if dev > tol:
                offenders.append((d, i, j, dev))
    return CheckReport("no_signalling", draws, worst, tol, offenders)


def temporal_signalling_witness(lam1: float = 1.0) -> float:
    """How far Charlie 1's setting moves the (a, b, c2) statistics.

    Uses the GHZ-optimal Svetlichny settings with two Charlies. Returns the
    largest absolute change of a joint probability across Charlie 1's two
    settings; a nonzero value is the expected signalling along the chain.
    """
    cfg = paper_scenario("svetlichny", [lam1, 1.0])
    worst = 0.0
    for i, j, l in itertools.product((0, 1), repeat=3):
        dists = []
        for k in (0, 1):
            p = np.zeros((2, 2, 2))
            for outcome, prob in oracle_joint_distribution(cfg, (i, j, k, l)).items():
                p[(1 - outcome[0]) // 2, (1 - outcome[1]) // 2, (1 - outcome[3]) // 2] += prob
            dists.append(p)
        worst = max(worst, float(np.max(np.abs(dists[0] - dists[1]))))
    return worst


def analytic_chain_agreement(rng: np.random.Generator, draws: int = 20, n_max: int = 7) -> float:
    """Max gap between simulation and the closed-form chain at the GHZ-optimal settings."""
    worst = 0.0
    for _ in range(draws):
        n = int(rng.integers(1, n_max + 1))
        lams = list(rng.uniform(0.05, 1.0, size=n - 1)) + [1.0]
        for kind in ("mermin", "svetlichny"):
            sim = evaluate(paper_scenario(kind, lams)).values(kind)
            closed = chain_values(kind, lams)
            worst = max(worst, max(abs(a - b) for a, b in zip(sim, closed)))
    return worst


__all__ = [
    "CheckReport",
    "analytic_chain_agreement",
    "no_signalling",
    "oracle_equivalence",
    "random_config",
    "temporal_signalling_witness",
]
