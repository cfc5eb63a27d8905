"""Spin observables, unsharp dichotomic effects and Lüders updates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import I2, PAULIS, embed, trace_product

ZERO_PROB_TOL = 1e-14


@dataclass(frozen=True)
class BlochDirection:
    """Unit vector ``(sinθ cosφ, sinθ sinφ, cosθ)``."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("direction angles must be finite")

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @classmethod
    def from_vector(cls, v) -> "BlochDirection":
        x, y, z = np.asarray(v, dtype=float) / np.linalg.norm(v)
        return cls(math.acos(max(-1.0, min(1.0, z))), math.atan2(y, x) % (2 * math.pi))


@dataclass(frozen=True)
class Sharpness:
    """Sharpness ``λ`` of an unsharp measurement, ``0 < λ <= 1``."""

    value: float

    def __post_init__(self):
        if not (0.0 < self.value <= 1.0):
            raise ValueError(f"sharpness must satisfy 0 < lambda <= 1, got {self.value}")

    def quality_factor(self) -> float:
        return math.sqrt(1.0 - self.value**2)

    def precision(self) -> float:
        return self.value


def _sharpness(s) -> Sharpness:
    return s if isinstance(s, Sharpness) else Sharpness(float(s))


def _check_outcome(outcome: int) -> int:
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome}")
    return outcome


def observable(d: BlochDirection) -> np.ndarray:
    """Spin observable ``d . σ``."""
    v = d.vector
    return v[0] * PAULIS[0] + v[1] * PAULIS[1] + v[2] * PAULIS[2]


def projector(d: BlochDirection, outcome: int) -> np.ndarray:
    return (I2 + _check_outcome(outcome) * observable(d)) / 2


@dataclass(frozen=True)
class Effect:
    matrix: np.ndarray
    direction: BlochDirection
    outcome: int
    sharpness: Sharpness


def effect(d: BlochDirection, outcome: int, s) -> Effect:
    """``λ P_outcome + (1 - λ) I/2``."""
    s = _sharpness(s)
    lam = s.value
    mat = lam * projector(d, outcome) + (1 - lam) * I2 / 2
    return Effect(mat, d, outcome, s)


def sqrt_effect(d: BlochDirection, outcome: int, s) -> np.ndarray:
    """Positive square root of :func:`effect`, taken in the projector eigenbasis."""
    lam = _sharpness(s).value
    return (
        math.sqrt((1 + lam) / 2) * projector(d, outcome)
        + math.sqrt((1 - lam) / 2) * projector(d, -outcome)
    )


def luders_update(rho: np.ndarray, party, d: BlochDirection, outcome: int, s):
    """Apply one unsharp measurement to ``party`` and condition on ``outcome``.

    ``rho`` may be a single-qubit state (``party`` is then ignored) or a
    three-qubit state on A (x) B (x) C.

    Returns
    -------
    post : ndarray
        Normalised state ``√E ρ √E / Tr[E ρ]``.
    prob : float
        Born probability ``Tr[E ρ]``.
    """
    s = _sharpness(s)
    k = sqrt_effect(d, outcome, s)
    e = effect(d, outcome, s).matrix
    rho = np.asarray(rho)
    if rho.shape == (2, 2):
        kk, ee = k, e
    elif rho.shape == (8, 8):
        kk, ee = embed(k, party), embed(e, party)
    else:
        raise ValueError(f"luders_update supports 2x2 or 8x8 states, got {rho.shape}")
    prob = trace_product(ee, rho).real
    if prob < ZERO_PROB_TOL:
        raise ValueError("outcome has zero probability; post-state undefined")
    post = kk @ rho @ kk / prob
    return post, float(min(prob, 1.0))
