"""Sequential sharing of tripartite correlations along Charlie's qubit.

Alice holds qubit A, Bob qubit B, and a chain of Charlies measures qubit C
one after another. Alice and Bob measure sharply; every Charlie measures with
their own sharpness and hands the qubit on. Later Charlies do not know the
earlier settings, so earlier settings are averaged uniformly and earlier
outcomes are marginalised.

Three routes compute the same averaged correlations:

* :func:`correlation_tables` feeds :func:`averaged_post_state` forward
  (Schrödinger picture, 8x8 density matrices);
* :func:`oracle_avg_correlation` enumerates every settings/outcome path with
  explicit Lüders updates;
* :func:`heisenberg_values` pulls Charlie's observable back through the
  averaged channels as a 3x3 Bloch map and contracts it with the state's
  correlation tensor. It is what the optimiser calls.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qcore
from .measure import BlochDirection, Sharpness, effect, luders_update, observable, projector, sqrt_effect
from .qcore import I2, PAULIS, check_density_matrix, embed, kron, trace_product

MAX_CHARLIES = 12
ORACLE_MAX_CHARLIES = 6

MERMIN_BOUND = 2.0
SVETLICHNY_BOUND = 4.0
MERMIN_QUANTUM_MAX = 4.0
SVETLICHNY_QUANTUM_MAX = 4.0 * math.sqrt(2.0)

# (i, j, l, sign) over the averaged correlations C_ijl
MERMIN_TERMS = ((1, 0, 0, 1), (0, 1, 0, 1), (0, 0, 1, 1), (1, 1, 1, -1))
SVETLICHNY_TERMS = (
    (0, 0, 0, 1),
    (1, 0, 0, 1),
    (0, 1, 0, -1),
    (1, 1, 0, 1),
    (0, 0, 1, 1),
    (1, 0, 1, -1),
    (0, 1, 1, 1),
    (1, 1, 1, 1),
)
TERMS = {"mermin": MERMIN_TERMS, "svetlichny": SVETLICHNY_TERMS}
CLASSICAL_BOUND = {"mermin": MERMIN_BOUND, "svetlichny": SVETLICHNY_BOUND}
QUANTUM_MAX = {"mermin": MERMIN_QUANTUM_MAX, "svetlichny": SVETLICHNY_QUANTUM_MAX}

SETTING_INDICES = tuple(itertools.product((0, 1), repeat=3))


def normalize_kind(kind: str) -> str:
    k = kind.lower()
    if k in ("m", "mermin"):
        return "mermin"
    if k in ("s", "svetlichny"):
        return "svetlichny"
    raise ValueError(f"unknown inequality {kind!r}; expected mermin or svetlichny")


# --------------------------------------------------------------------------
# scenario description


@dataclass(frozen=True)
class InitialState:
    kind: str
    matrix: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        if self.matrix.shape != (8, 8):
            raise ValueError("initial state must be a three-qubit (8x8) density matrix")
        check_density_matrix(self.matrix)

    def __eq__(self, other):
        return (
            isinstance(other, InitialState)
            and self.kind == other.kind
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.kind, self.matrix.tobytes()))

    @classmethod
    def ghz(cls) -> "InitialState":
        amps = np.zeros(8)
        amps[0] = amps[7] = 1.0
        return cls("GHZ", qcore.pure_state(amps))

    @classmethod
    def w(cls) -> "InitialState":
        amps = np.zeros(8)
        amps[[1, 2, 4]] = 1.0
        return cls("W", qcore.pure_state(amps))

    @classmethod
    def custom(cls, matrix) -> "InitialState":
        return cls("Custom", np.array(matrix, dtype=complex))

    @classmethod
    def named(cls, kind: str) -> "InitialState":
        k = kind.upper()
        if k == "GHZ":
            return cls.ghz()
        if k == "W":
            return cls.w()
        raise ValueError(f"unknown named state {kind!r}; expected GHZ or W")


@dataclass(frozen=True)
class PartySettings:
    setting0: BlochDirection
    setting1: BlochDirection

    def __getitem__(self, i: int) -> BlochDirection:
        if i == 0:
            return self.setting0
        if i == 1:
            return self.setting1
        raise IndexError(f"setting index must be 0 or 1, got {i}")

    @classmethod
    def from_angles(cls, theta0, phi0, theta1, phi1) -> "PartySettings":
        return cls(BlochDirection(theta0, phi0), BlochDirection(theta1, phi1))

    def angles(self) -> tuple[float, float, float, float]:
        return (self.setting0.theta, self.setting0.phi, self.setting1.theta, self.setting1.phi)


@dataclass(frozen=True)
class Charlie:
    settings: PartySettings
    sharpness: Sharpness

    @property
    def lam(self) -> float:
        return self.sharpness.value


@dataclass(frozen=True)
class ScenarioConfig:
    """Initial state plus every party's two settings and the Charlies' sharpness schedule.

    ``require_sharp_final`` enforces that the last Charlie measures
    projectively (``λ_n = 1``); turn it off for sweeps over ``λ_n``.
    """

    state: InitialState
    alice: PartySettings
    bob: PartySettings
    charlies: tuple[Charlie, ...]
    require_sharp_final: bool = True

    def __post_init__(self):
        object.__setattr__(self, "charlies", tuple(self.charlies))
        n = len(self.charlies)
        if n < 1:
            raise ValueError("a scenario needs at least one Charlie")
        if n > MAX_CHARLIES:
            raise ValueError(f"at most {MAX_CHARLIES} Charlies are supported, got {n}")
        if self.require_sharp_final and self.charlies[-1].lam != 1.0:
            raise ValueError(
                f"charlie[{n}].sharpness: final Charlie must measure sharply (lambda = 1), "
                f"got {self.charlies[-1].lam}"
            )

    @property
    def n(self) -> int:
        return len(self.charlies)

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(c.lam for c in self.charlies)

    def with_lambdas(self, lambdas: Sequence[float], require_sharp_final: bool | None = None) -> "ScenarioConfig":
        if len(lambdas) != self.n:
            raise ValueError(f"expected {self.n} sharpness values, got {len(lambdas)}")
        charlies = tuple(Charlie(c.settings, Sharpness(float(lam))) for c, lam in zip(self.charlies, lambdas))
        flag = self.require_sharp_final if require_sharp_final is None else require_sharp_final
        return ScenarioConfig(self.state, self.alice, self.bob, charlies, flag)


HALF_PI = math.pi / 2

# setting 0 along y, setting 1 along x, for every party
PAPER_MERMIN_SETTINGS = PartySettings.from_angles(HALF_PI, HALF_PI, HALF_PI, 0.0)
# Alice's pair is listed x-first here: with the y-first order quoted alongside the
# Svetlichny expression the GHZ value is exactly zero.
PAPER_SVETLICHNY_ALICE = PartySettings.from_angles(HALF_PI, 0.0, HALF_PI, HALF_PI)
PAPER_SVETLICHNY_BOB = PartySettings.from_angles(HALF_PI, HALF_PI, HALF_PI, 0.0)
PAPER_SVETLICHNY_CHARLIE = PartySettings.from_angles(HALF_PI, math.pi / 4, HALF_PI, 3 * math.pi / 4)


def paper_settings(kind: str) -> tuple[PartySettings, PartySettings, PartySettings]:
    """(alice, bob, charlie) settings that reach the quantum maximum on GHZ."""
    kind = normalize_kind(kind)
    if kind == "mermin":
        return PAPER_MERMIN_SETTINGS, PAPER_MERMIN_SETTINGS, PAPER_MERMIN_SETTINGS
    return PAPER_SVETLICHNY_ALICE, PAPER_SVETLICHNY_BOB, PAPER_SVETLICHNY_CHARLIE


def paper_scenario(
    kind: str,
    lambdas: Sequence[float],
    state: InitialState | None = None,
    require_sharp_final: bool = True,
) -> ScenarioConfig:
    """Scenario with the GHZ-optimal equatorial settings for every Charlie."""
    a, b, c = paper_settings(kind)
    charlies = tuple(Charlie(c, Sharpness(float(lam))) for lam in lambdas)
    return ScenarioConfig(state or InitialState.ghz(), a, b, charlies, require_sharp_final)


# --------------------------------------------------------------------------
# state-recursion path


def averaged_post_state(rho: np.ndarray, charlie: Charlie) -> np.ndarray:
    """State handed to the next Charlie, averaged over this Charlie's settings and outcomes."""
    out = np.zeros((8, 8), dtype=complex)
    for k in (0, 1):
        for c in (1, -1):
            kraus = embed(sqrt_effect(charlie.settings[k], c, charlie.sharpness), "C")
            out += kraus @ rho @ kraus
    return out / 2


@dataclass(frozen=True)
class CorrelationTable:
    """Averaged correlations ``C_ijl`` seen by Charlie ``m``."""

    m: int
    values: dict

    def __post_init__(self):
        if set(self.values) != set(SETTING_INDICES):
            raise ValueError("correlation table needs all eight (i, j, l) entries")
        for key, v in self.values.items():
            if abs(v) > 1 + 1e-12:
                raise ValueError(f"correlation {key} = {v} outside [-1, 1]")

    def __getitem__(self, key):
        return self.values[key]

    def as_list(self) -> list[float]:
        return [self.values[key] for key in SETTING_INDICES]


def _party_observables(settings: PartySettings):
    return [observable(settings[i]) for i in (0, 1)]


def _correlations_on_state(rho, alice, bob, charlie: Charlie) -> dict:
    obs_a = _party_observables(alice)
    obs_b = _party_observables(bob)
    obs_c = _party_observables(charlie.settings)
    vals = {}
    for i, j, l in SETTING_INDICES:
        op = kron(obs_a[i], obs_b[j], obs_c[l])
        vals[(i, j, l)] = charlie.lam * trace_product(op, rho).real
    return vals


def post_states(config: ScenarioConfig, validate: bool = False) -> list[np.ndarray]:
    """States in front of Charlie 1..n (index 0 is the initial state)."""
    rho = config.state.matrix
    states = [rho]
    for charlie in config.charlies[:-1]:
        rho = averaged_post_state(rho, charlie)
        if validate:
            check_density_matrix(rho)
        states.append(rho)
    return states


def correlation_tables(config: ScenarioConfig) -> list[CorrelationTable]:
    return [
        CorrelationTable(m, _correlations_on_state(rho, config.alice, config.bob, config.charlies[m - 1]))
        for m, rho in enumerate(post_states(config), start=1)
    ]


def _check_m(config: ScenarioConfig, m: int) -> None:
    if not 1 <= m <= config.n:
        raise ValueError(f"Charlie index m={m} out of range 1..{config.n}")


def correlation_table(config: ScenarioConfig, m: int) -> CorrelationTable:
    _check_m(config, m)
    rho = config.state.matrix
    for charlie in config.charlies[: m - 1]:
        rho = averaged_post_state(rho, charlie)
    return CorrelationTable(m, _correlations_on_state(rho, config.alice, config.bob, config.charlies[m - 1]))


def avg_correlation(config: ScenarioConfig, m: int, i: int, j: int, l: int) -> float:
    return correlation_table(config, m)[(i, j, l)]


def inequality_from_table(table: CorrelationTable, kind: str) -> float:
    return abs(sum(sign * table[(i, j, l)] for i, j, l, sign in TERMS[normalize_kind(kind)]))


def mermin_value(config: ScenarioConfig, m: int) -> float:
    return inequality_from_table(correlation_table(config, m), "mermin")


def svetlichny_value(config: ScenarioConfig, m: int) -> float:
    return inequality_from_table(correlation_table(config, m), "svetlichny")


@dataclass(frozen=True)
class CharlieReport:
    m: int
    lam: float
    mermin: float
    svetlichny: float
    table: CorrelationTable


@dataclass(frozen=True)
class InequalityReport:
    scenario: ScenarioConfig
    rows: tuple[CharlieReport, ...]

    def __post_init__(self):
        for r in self.rows:
            if not (0 <= r.mermin <= MERMIN_QUANTUM_MAX + 1e-9):
                raise ValueError(f"Mermin value {r.mermin} of Charlie {r.m} exceeds the quantum bound")
            if not (0 <= r.svetlichny <= SVETLICHNY_QUANTUM_MAX + 1e-9):
                raise ValueError(f"Svetlichny value {r.svetlichny} of Charlie {r.m} exceeds the quantum bound")

    def values(self, kind: str) -> list[float]:
        kind = normalize_kind(kind)
        return [r.mermin if kind == "mermin" else r.svetlichny for r in self.rows]


def evaluate(config: ScenarioConfig) -> InequalityReport:
    rows = tuple(
        CharlieReport(
            t.m,
            config.charlies[t.m - 1].lam,
            inequality_from_table(t, "mermin"),
            inequality_from_table(t, "svetlichny"),
            t,
        )
        for t in correlation_tables(config)
    )
    return InequalityReport(config, rows)


def joint_probability(config: ScenarioConfig, settings_choice: Sequence[int], outcomes: Sequence[int]) -> float:
    """Probability of one full outcome tuple ``(a, b, c1, ..., cn)``.

    ``settings_choice`` is ``(i, j, k1, ..., kn)``. The operator is built as a
    single unnormalised sandwich, independently of :func:`luders_update`.
    """
    n = config.n
    if len(settings_choice) != n + 2 or len(outcomes) != n + 2:
        raise ValueError(f"need {n + 2} settings and outcomes (Alice, Bob, {n} Charlies)")
    pa = projector(config.alice[settings_choice[0]], outcomes[0])
    pb = projector(config.bob[settings_choice[1]], outcomes[1])
    kc = I2
    for charlie, k, c in zip(config.charlies, settings_choice[2:], outcomes[2:]):
        kc = sqrt_effect(charlie.settings[k], c, charlie.sharpness) @ kc
    kraus = kron(pa, pb, kc)
    sigma = kraus @ config.state.matrix @ kraus.conj().T
    return float(np.trace(sigma).real)


# --------------------------------------------------------------------------
# path-enumeration oracle


def oracle_joint_distribution(config: ScenarioConfig, settings_choice: Sequence[int]) -> dict:
    """Exact distribution over ``(a, b, c1, ..., cn)`` by chained Lüders updates.

    Every branch is a separate normalised state updated with
    :func:`seqnonlocal.measure.luders_update`; there is no averaging.
    """
    n = config.n
    if n > ORACLE_MAX_CHARLIES:
        raise ValueError("oracle enumeration bound exceeded")
    if len(settings_choice) != n + 2:
        raise ValueError(f"need {n + 2} setting indices")
    steps = [("A", config.alice[settings_choice[0]], Sharpness(1.0)), ("B", config.bob[settings_choice[1]], Sharpness(1.0))]
    steps += [("C", ch.settings[k], ch.sharpness) for ch, k in zip(config.charlies, settings_choice[2:])]

    dist = {}

    def walk(rho, depth, prob, prefix):
        if depth == len(steps):
            dist[prefix] = prob
            return
        party, d, s = steps[depth]
        for outcome in (1, -1):
            try:
                post, p = luders_update(rho, party, d, outcome, s)
            except ValueError:
                _fill_zero(prefix + (outcome,), len(steps) - depth - 1, dist)
                continue
            walk(post, depth + 1, prob * p, prefix + (outcome,))

    walk(config.state.matrix, 0, 1.0, ())
    return dist


def _fill_zero(prefix, remaining, dist):
    for tail in itertools.product((1, -1), repeat=remaining):
        dist[prefix + tail] = 0.0


def oracle_avg_correlation(config: ScenarioConfig, m: int, i: int, j: int, l: int) -> float:
    """``C_ijl`` for Charlie ``m`` from the enumerated distributions."""
    _check_m(config, m)
    n = config.n
    total = 0.0
    weight = 0.5 ** (m - 1)
    for prior in itertools.product((0, 1), repeat=m - 1):
        # settings of Charlies after m do not affect Charlie m; fix them to 0
        choice = (i, j) + prior + (l,) + (0,) * (n - m)
        for outcome, p in oracle_joint_distribution(config, choice).items():
            total += weight * outcome[0] * outcome[1] * outcome[1 + m] * p
    return total


def oracle_correlation_table(config: ScenarioConfig, m: int) -> CorrelationTable:
    return CorrelationTable(m, {key: oracle_avg_correlation(config, m, *key) for key in SETTING_INDICES})


def charlie_marginal(config: ScenarioConfig, settings_choice: Sequence[int], party_slot: int) -> dict:
    """Outcome marginal of one party from the oracle. Slot 0 is Alice, 1 Bob, 2.. Charlies."""
    marg = {1: 0.0, -1: 0.0}
    for outcome, p in oracle_joint_distribution(config, settings_choice).items():
        marg[outcome[party_slot]] += p
    return marg


# --------------------------------------------------------------------------
# Heisenberg-picture path


def correlation_tensor(rho: np.ndarray) -> np.ndarray:
    """``T[a, b, c] = Tr[ρ σ_a ⊗ σ_b ⊗ σ_c]`` for a, b, c in x, y, z."""
    t = np.empty((3, 3, 3))
    for a, b, c in itertools.product(range(3), repeat=3):
        t[a, b, c] = trace_product(kron(PAULIS[a], PAULIS[b], PAULIS[c]), rho).real
    return t


def unit_vectors(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def averaged_channel_map(c_dirs: np.ndarray, lam: float) -> np.ndarray:
    """3x3 Bloch map of one Charlie's averaged measurement channel.

    Components along a measured direction survive; orthogonal ones shrink by
    ``√(1 - λ²)``. ``c_dirs`` has shape (2, 3).
    """
    f = math.sqrt(max(0.0, 1.0 - lam * lam))
    proj = 0.5 * (np.outer(c_dirs[0], c_dirs[0]) + np.outer(c_dirs[1], c_dirs[1]))
    return f * np.eye(3) + (1.0 - f) * proj


def heisenberg_signed_sums(
    tensor: np.ndarray,
    a_dirs: np.ndarray,
    b_dirs: np.ndarray,
    c_dirs: np.ndarray,
    lambdas: Sequence[float],
    kind: str,
) -> np.ndarray:
    """Signed inequality sums per Charlie with each Charlie treated as sharp.

    The unsharp value of Charlie ``m`` is ``λ_m * |sum_m|``. ``c_dirs`` has
    shape (n, 2, 3); ``lambdas[m]`` only enters the channel of Charlies after m.
    """
    terms = TERMS[normalize_kind(kind)]
    ab = np.einsum("ia,jb,abc->ijc", a_dirs, b_dirs, tensor)
    # weight[l] = sum of sign * ab[i, j] over terms with Charlie setting l
    w = np.zeros((2, 3))
    for i, j, l, sign in terms:
        w[l] += sign * ab[i, j]
    n = c_dirs.shape[0]
    out = np.empty(n)
    back = np.eye(3)
    for m in range(n):
        eff = c_dirs[m] @ back.T
        out[m] = w[0] @ eff[0] + w[1] @ eff[1]
        if m < n - 1:
            back = back @ averaged_channel_map(c_dirs[m], lambdas[m])
    return out


def _config_directions(config: ScenarioConfig):
    a = np.array([config.alice[i].vector for i in (0, 1)])
    b = np.array([config.bob[i].vector for i in (0, 1)])
    c = np.array([[ch.settings[i].vector for i in (0, 1)] for ch in config.charlies])
    return a, b, c


def heisenberg_values(config: ScenarioConfig, kind: str, tensor: np.ndarray | None = None) -> np.ndarray:
    """Per-Charlie Mermin or Svetlichny values via the Bloch-map route."""
    t = correlation_tensor(config.state.matrix) if tensor is None else tensor
    a, b, c = _config_directions(config)
    lam = np.array(config.lambdas)
    return lam * np.abs(heisenberg_signed_sums(t, a, b, c, lam, kind))


# --------------------------------------------------------------------------
# closed-form chain at the GHZ-optimal equatorial settings


def chain_values(kind: str, lambdas: Sequence[float]) -> list[float]:
    """``V_m = B λ_m Π_{k<m} (1 + √(1 - λ_k²)) / 2`` with ``B`` the quantum maximum."""
    bound = QUANTUM_MAX[normalize_kind(kind)]
    vals = []
    factor = 1.0
    for lam in lambdas:
        vals.append(bound * lam * factor)
        factor *= (1.0 + math.sqrt(max(0.0, 1.0 - lam * lam))) / 2.0
    return vals


def analytic_chain(kind: str, thresholds: Sequence[float]) -> tuple[list[float], float]:
    """Smallest sharpness schedule that holds Charlies 1..n-1 at ``thresholds``.

    Returns the schedule (ending in the final sharp 1.0) and the final
    Charlie's value.
    """
    bound = QUANTUM_MAX[normalize_kind(kind)]
    lambdas = []
    factor = 1.0
    for t in thresholds:
        lam = t / (bound * factor)
        if lam > 1.0:
            raise ValueError("threshold chain infeasible")
        if lam <= 0.0:
            raise ValueError("thresholds must be positive")
        lambdas.append(lam)
        factor *= (1.0 + math.sqrt(1.0 - lam * lam)) / 2.0
    lambdas.append(1.0)
    return lambdas, bound * factor
