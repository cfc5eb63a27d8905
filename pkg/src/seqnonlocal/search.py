"""Derivative-free search over measurement angles and sharpness schedules.

The objective is the final Charlie's inequality value. Earlier Charlies must
stay at or above their thresholds. Charlie ``m``'s own value is exactly
``λ_m`` times its sharp value, so every candidate is first *repaired*: ``λ_m``
is raised to the smallest value meeting the threshold. A quadratic penalty
(plus a small exact L1 term) only acts where even ``λ_m = 1`` falls short.

Local search is multistart Nelder–Mead (scipy) followed by a coordinate-wise
golden-section polish. One start always sits on the GHZ-optimal equatorial
settings.
"""

from __future__ import annotations

import itertools
import logging
import math
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .measure import BlochDirection, Sharpness
from .protocol import (
    CLASSICAL_BOUND,
    MAX_CHARLIES,
    TERMS,
    Charlie,
    InitialState,
    PartySettings,
    ScenarioConfig,
    correlation_tensor,
    evaluate,
    normalize_kind,
    paper_scenario,
    paper_settings,
)

log = logging.getLogger(__name__)

PENALTY_QUADRATIC = 1e3
PENALTY_LINEAR = 1e2
FEASIBILITY_TOL = 1e-9
DEFAULT_MARGIN = 1e-3
DEFAULT_BUDGET = 200_000
DEFAULT_RESTARTS = 64
LAMBDA_FLOOR = 1e-9
# repaired sharpness is nudged up so thresholds survive round-off in other evaluation routes
REPAIR_SLACK = 1e-12

FREE_ANGLES = "free"
PAPER_ANGLES = "paper"


def rng_stream(seed: int, label: str) -> np.random.Generator:
    """Independent generator for a named subsystem, derived from one seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(zlib.crc32(label.encode()),)))


def _reflect(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    span = hi - lo
    y = np.mod(x - lo, 2 * span)
    return lo + np.where(y > span, 2 * span - y, y)


def _state(state) -> InitialState:
    return state if isinstance(state, InitialState) else InitialState.named(state)


@dataclass
class SearchSpec:
    kind: str = "mermin"
    state: str | InitialState = "GHZ"
    n: int = 2
    thresholds: Sequence[float] = ()
    angle_mode: str = FREE_ANGLES
    budget: int = DEFAULT_BUDGET
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0

    def __post_init__(self):
        self.kind = normalize_kind(self.kind)
        self.thresholds = tuple(float(t) for t in self.thresholds)
        if not 1 <= self.n <= MAX_CHARLIES:
            raise ValueError(f"n must be in 1..{MAX_CHARLIES}, got {self.n}")
        if len(self.thresholds) != self.n - 1:
            raise ValueError(f"need n - 1 = {self.n - 1} thresholds, got {len(self.thresholds)}")
        if self.angle_mode not in (FREE_ANGLES, PAPER_ANGLES):
            raise ValueError(f"angle_mode must be {FREE_ANGLES!r} or {PAPER_ANGLES!r}")
        if self.budget < 1 or self.restarts < 1:
            raise ValueError("budget and restarts must be positive")


@dataclass
class SearchResult:
    best_value: float
    best_config: ScenarioConfig
    feasible: bool
    evaluations_used: int
    values: list[float] = field(default_factory=list)
    thresholds_met: bool = False
    penalty: float = 0.0

    @property
    def lambdas(self) -> tuple[float, ...]:
        return self.best_config.lambdas


class _Budget(Exception):
    pass


class _Target(Exception):
    pass


class _Problem:
    """Parameter layout, fast objective and best-point bookkeeping."""

    def __init__(self, spec: SearchSpec, stop_value: float | None = None):
        self.spec = spec
        self.state = _state(spec.state)
        self.tensor = correlation_tensor(self.state.matrix)
        self.terms = TERMS[spec.kind]
        self.n = spec.n
        self.thr = np.array(spec.thresholds)
        self.free = spec.angle_mode == FREE_ANGLES
        self.n_angles = 4 * (2 + self.n) if self.free else 0
        self.dim = self.n_angles + self.n - 1
        self.stop_value = stop_value
        self.evals = 0
        self.best_key = None
        self.best = None
        a, b, c = paper_settings(spec.kind)
        self.paper_angles = np.array(a.angles() + b.angles() + c.angles() * self.n)

    # parameter vector -> (a_dirs, b_dirs, c_dirs, raw lambdas)
    def decode(self, x: np.ndarray):
        if self.free:
            ang = np.asarray(x[: self.n_angles], dtype=float).reshape(-1, 2)
            theta = _reflect(ang[:, 0], 0.0, math.pi)
            phi = _reflect(ang[:, 1], 0.0, 2 * math.pi)
        else:
            ang = self.paper_angles.reshape(-1, 2)
            theta, phi = ang[:, 0], ang[:, 1]
        st = np.sin(theta)
        dirs = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
        raw = _reflect(np.asarray(x[self.n_angles :], dtype=float), 0.0, 1.0)
        return dirs[0:2], dirs[2:4], dirs[4:].reshape(self.n, 2, 3), np.maximum(raw, LAMBDA_FLOOR), theta, phi

    def chain(self, x: np.ndarray):
        """Per-Charlie values, repaired schedule and total constraint deficit."""
        a, b, c, raw, theta, phi = self.decode(x)
        ab = np.einsum("ia,jb,abc->ijc", a, b, self.tensor)
        w = np.zeros((2, 3))
        for i, j, l, sign in self.terms:
            w[l] += sign * ab[i, j]
        back = np.eye(3)
        values = np.empty(self.n)
        lambdas = np.ones(self.n)
        deficit = 0.0
        for m in range(self.n):
            eff = back @ c[m].T
            s = abs(w[0] @ eff[:, 0] + w[1] @ eff[:, 1])
            if m == self.n - 1:
                values[m] = s
                break
            t = self.thr[m]
            need = t / s * (1 + REPAIR_SLACK) if s > 0 else math.inf
            lam = min(1.0, max(raw[m], need))
            lambdas[m] = lam
            values[m] = lam * s
            if values[m] < t:
                deficit += t - values[m]
            f = math.sqrt(max(0.0, 1.0 - lam * lam))
            proj = 0.5 * (np.outer(c[m, 0], c[m, 0]) + np.outer(c[m, 1], c[m, 1]))
            back = back @ (f * np.eye(3) + (1.0 - f) * proj)
        return values, lambdas, deficit, theta, phi

    def objective(self, x: np.ndarray) -> float:
        if self.evals >= self.spec.budget:
            raise _Budget
        self.evals += 1
        values, lambdas, deficit, theta, phi = self.chain(x)
        final = values[-1]
        key = (deficit > FEASIBILITY_TOL, deficit if deficit > FEASIBILITY_TOL else 0.0, -final)
        if self.best_key is None or key < self.best_key:
            self.best_key = key
            self.best = (values.copy(), lambdas.copy(), deficit, theta.copy(), phi.copy())
            if self.stop_value is not None and deficit <= FEASIBILITY_TOL and final > self.stop_value:
                raise _Target
        return -(final - PENALTY_QUADRATIC * deficit**2 - PENALTY_LINEAR * deficit)

    def starts(self, rng: np.random.Generator):
        """GHZ-optimal start first, then uniform random starts."""
        lam0 = np.full(self.n - 1, 1e-3)
        if self.free:
            yield np.concatenate([self.paper_angles, lam0])
        else:
            yield lam0
        while True:
            parts = []
            if self.free:
                ang = np.empty(self.n_angles)
                ang[0::2] = rng.uniform(0, math.pi, self.n_angles // 2)
                ang[1::2] = rng.uniform(0, 2 * math.pi, self.n_angles // 2)
                parts.append(ang)
            parts.append(rng.uniform(0, 0.6, self.n - 1))
            yield np.concatenate(parts)

    def config_from_best(self) -> ScenarioConfig:
        _, lambdas, _, theta, phi = self.best
        dirs = [BlochDirection(float(t), float(p)) for t, p in zip(theta, phi)]
        alice = PartySettings(dirs[0], dirs[1])
        bob = PartySettings(dirs[2], dirs[3])
        charlies = tuple(
            Charlie(PartySettings(dirs[4 + 2 * m], dirs[5 + 2 * m]), Sharpness(float(lambdas[m])))
            for m in range(self.n)
        )
        return ScenarioConfig(self.state, alice, bob, charlies)


def _golden_polish(problem: _Problem, x: np.ndarray, width: float = 0.05, iters: int = 20) -> np.ndarray:
    """One pass of bounded golden-section line search along every coordinate."""
    invphi = (math.sqrt(5) - 1) / 2
    x = np.array(x, dtype=float)
    fx = problem.objective(x)
    for i in range(x.size):
        lo, hi = x[i] - width, x[i] + width
        c = hi - invphi * (hi - lo)
        d = lo + invphi * (hi - lo)

        def f(v):
            y = x.copy()
            y[i] = v
            return problem.objective(y)

        fc, fd = f(c), f(d)
        for _ in range(iters):
            if fc < fd:
                hi, d, fd = d, c, fc
                c = hi - invphi * (hi - lo)
                fc = f(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + invphi * (hi - lo)
                fd = f(d)
        v, fv = (c, fc) if fc < fd else (d, fd)
        if fv < fx:
            x[i], fx = v, fv
    return x


def optimize(spec: SearchSpec, stop_value: float | None = None) -> SearchResult:
    """Maximise the last Charlie's value subject to the earlier thresholds.

    Parameters
    ----------
    spec : SearchSpec
    stop_value : float, optional
        Stop as soon as a threshold-respecting point beats this final value.
        Used by :func:`max_observers`; the result is then not a maximum.

    Returns
    -------
    SearchResult
        ``feasible`` means every threshold holds and the final value beats
        the classical bound.
    """
    problem = _Problem(spec, stop_value)
    rng = rng_stream(spec.seed, "search.starts")
    polish_budget = 0 if problem.dim == 0 else min(spec.budget // 10, 2 * 41 * problem.dim + 1)
    per_start = max(50 * problem.dim, (spec.budget - polish_budget) // spec.restarts) if problem.dim else 1
    best_x, best_f = None, math.inf
    try:
        if problem.dim == 0:
            problem.objective(np.empty(0))
        else:
            for r, x0 in zip(range(spec.restarts), problem.starts(rng)):
                remaining = spec.budget - polish_budget - problem.evals
                if remaining <= problem.dim + 1:
                    break
                res = minimize(
                    problem.objective,
                    x0,
                    method="Nelder-Mead",
                    options={
                        "maxfev": min(per_start, remaining),
                        "xatol": 1e-10,
                        "fatol": 1e-12,
                        "adaptive": problem.dim > 4,
                        "initial_simplex": _initial_simplex(x0, problem),
                    },
                )
                if res.fun < best_f:
                    best_x, best_f = res.x, res.fun
            if best_x is not None:
                _golden_polish(problem, best_x)
    except (_Budget, _Target):
        pass

    values, lambdas, deficit, _, _ = problem.best
    config = problem.config_from_best()
    bound = CLASSICAL_BOUND[spec.kind]
    met = deficit <= FEASIBILITY_TOL
    report = evaluate(config).values(spec.kind)
    result = SearchResult(
        best_value=float(values[-1]),
        best_config=config,
        feasible=bool(met and values[-1] > bound),
        evaluations_used=problem.evals,
        values=report,
        thresholds_met=bool(met),
        penalty=float(deficit),
    )
    log.debug("optimize %s n=%d: value %.6f feasible=%s evals=%d", spec.kind, spec.n, result.best_value, result.feasible, result.evaluations_used)
    return result


def _initial_simplex(x0: np.ndarray, problem: _Problem) -> np.ndarray:
    step = np.full(problem.dim, 0.3)
    step[problem.n_angles :] = 0.1
    simplex = np.tile(x0, (problem.dim + 1, 1))
    for k in range(problem.dim):
        simplex[k + 1, k] += step[k]
    return simplex


def max_observers(
    kind: str,
    state: str | InitialState = "GHZ",
    margin: float = DEFAULT_MARGIN,
    budget: int = 100_000,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    n_max: int = MAX_CHARLIES,
) -> int:
    """Largest number of Charlies that can all beat the classical bound by ``margin``.

    Ascends ``n`` from 1 and stops at the first ``n`` where the search finds no
    point with every Charlie above ``bound + margin``.
    """
    kind = normalize_kind(kind)
    level = CLASSICAL_BOUND[kind] + margin
    for n in range(1, n_max + 1):
        spec = SearchSpec(kind, state, n, [level] * (n - 1), FREE_ANGLES, budget, restarts, seed)
        res = optimize(spec, stop_value=level)
        ok = res.thresholds_met and res.best_value > level
        log.info("max_observers %s %s n=%d: final %.6f ok=%s", kind, spec.state, n, res.best_value, ok)
        if not ok:
            return n - 1
    return n_max


def sharpness_window(kind: str = "svetlichny", tol: float = 1e-4) -> tuple[float, float]:
    """Range of ``λ_1`` over which both of two Charlies violate at the GHZ-optimal settings.

    Lower end: Charlie 1 reaches the bound. Upper end: Charlie 2 drops to it.
    Both found by bisection on the full two-Charlie simulation.
    """
    kind = normalize_kind(kind)
    bound = CLASSICAL_BOUND[kind]

    def values(lam):
        return evaluate(paper_scenario(kind, [lam, 1.0])).values(kind)

    def bisect(g, lo, hi):
        # g(lo) < 0 <= g(hi)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    low = bisect(lambda lam: values(lam)[0] - bound, 1e-6, 1.0)
    high = bisect(lambda lam: bound - values(lam)[1], low, 1.0)
    return low, high


@dataclass(frozen=True)
class SweepRow:
    index: int
    lambdas: tuple[float, ...]
    mermin: tuple[float, ...]
    svetlichny: tuple[float, ...]


def sweep(template: ScenarioConfig, grids: Sequence[Sequence[float]], budget: int = 100_000) -> list[SweepRow]:
    """Evaluate every point of the Cartesian product of per-Charlie sharpness grids.

    ``grids[m]`` lists the values for Charlie ``m + 1``; pass ``[1.0]`` to pin one.
    """
    if len(grids) != template.n:
        raise ValueError(f"need one grid per Charlie ({template.n}), got {len(grids)}")
    total = math.prod(len(g) for g in grids)
    if total > budget:
        raise ValueError(f"sweep of {total} points exceeds budget {budget}")
    rows = []
    for idx, lambdas in enumerate(itertools.product(*grids)):
        cfg = template.with_lambdas(lambdas, require_sharp_final=False)
        rep = evaluate(cfg)
        rows.append(SweepRow(idx, tuple(float(v) for v in lambdas), tuple(rep.values("mermin")), tuple(rep.values("svetlichny"))))
    return rows
