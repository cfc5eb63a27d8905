import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqnonlocal import checks
from seqnonlocal.measure import BlochDirection, Sharpness
from seqnonlocal.protocol import (
    PAPER_MERMIN_SETTINGS,
    Charlie,
    InitialState,
    PartySettings,
    ScenarioConfig,
    analytic_chain,
    avg_correlation,
    averaged_post_state,
    chain_values,
    correlation_table,
    evaluate,
    heisenberg_values,
    joint_probability,
    mermin_value,
    oracle_avg_correlation,
    oracle_correlation_table,
    oracle_joint_distribution,
    paper_scenario,
    post_states,
    svetlichny_value,
)
from seqnonlocal.qcore import check_density_matrix, purity

HP = math.pi / 2
X = BlochDirection(HP, 0.0)
Y = BlochDirection(HP, HP)
Z = BlochDirection(0.0, 0.0)


def single(state, a, b, c, lam=1.0):
    return ScenarioConfig(state, PartySettings(a, a), PartySettings(b, b), (Charlie(PartySettings(c, c), Sharpness(lam)),))


def test_named_states_are_pure(ghz, w_state):
    assert purity(ghz.matrix) == pytest.approx(1, abs=1e-12)
    assert purity(w_state.matrix) == pytest.approx(1, abs=1e-12)
    assert ghz.matrix[0, 7] == pytest.approx(0.5)
    assert w_state.matrix[1, 2] == pytest.approx(1 / 3)


def test_config_validation(ghz):
    s = PAPER_MERMIN_SETTINGS
    with pytest.raises(ValueError, match="sharply"):
        ScenarioConfig(ghz, s, s, (Charlie(s, Sharpness(0.5)),))
    ScenarioConfig(ghz, s, s, (Charlie(s, Sharpness(0.5)),), require_sharp_final=False)
    with pytest.raises(ValueError, match="at most"):
        paper_scenario("mermin", [0.5] * 12 + [1.0])
    with pytest.raises(ValueError, match="at least one"):
        ScenarioConfig(ghz, s, s, ())


# averaged_post_state


def test_sharp_z_dephases_ghz(ghz):
    ch = Charlie(PartySettings(Z, Z), Sharpness(1.0))
    expected = np.zeros((8, 8))
    expected[0, 0] = expected[7, 7] = 0.5
    np.testing.assert_allclose(averaged_post_state(ghz.matrix, ch), expected, atol=1e-15)


def test_weak_limit_leaves_state(ghz):
    ch = Charlie(PAPER_MERMIN_SETTINGS, Sharpness(1e-9))
    np.testing.assert_allclose(averaged_post_state(ghz.matrix, ch), ghz.matrix, atol=1e-8)


def test_post_state_feeds_paper_value(ghz):
    cfg = paper_scenario("mermin", [0.525, 1.0])
    rho = averaged_post_state(ghz.matrix, cfg.charlies[0])
    check_density_matrix(rho)
    m2 = mermin_value(ScenarioConfig(InitialState.custom(rho), cfg.alice, cfg.bob, cfg.charlies[1:]), 1)
    assert m2 == pytest.approx(3.70, abs=0.01)


# joint probabilities


def test_ghz_sharp_z_perfect_correlation(ghz):
    cfg = single(ghz, Z, Z, Z)
    assert joint_probability(cfg, (0, 0, 0), (1, 1, 1)) == pytest.approx(0.5, abs=1e-15)
    assert joint_probability(cfg, (0, 0, 0), (1, 1, -1)) == pytest.approx(0, abs=1e-15)


def test_ghz_xxx_correlation_by_enumeration(ghz):
    cfg = single(ghz, X, X, X)
    total = sum(
        a * b * c * joint_probability(cfg, (0, 0, 0), (a, b, c))
        for a, b, c in itertools.product((1, -1), repeat=3)
    )
    assert total == pytest.approx(1, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_joint_probability_normalised_and_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    cfg = checks.random_config(rng)
    choice = tuple(int(k) for k in rng.integers(0, 2, cfg.n + 2))
    dist = oracle_joint_distribution(cfg, choice)
    total = 0.0
    for outcome in itertools.product((1, -1), repeat=cfg.n + 2):
        p = joint_probability(cfg, choice, outcome)
        assert p == pytest.approx(dist[outcome], abs=1e-12)
        total += p
    assert total == pytest.approx(1, abs=1e-12)


# averaged correlations


def test_ghz_yyx_is_minus_one(ghz):
    cfg = single(ghz, Y, Y, X)
    assert avg_correlation(cfg, 1, 0, 0, 0) == pytest.approx(-1, abs=1e-12)
    total = sum(
        a * b * c * joint_probability(cfg, (0, 0, 0), (a, b, c))
        for a, b, c in itertools.product((1, -1), repeat=3)
    )
    assert total == pytest.approx(-1, abs=1e-12)


def test_vanishing_disturbance(rng):
    cfg1 = checks.random_config(rng, n_max=1)
    c = cfg1.charlies[0]
    cfg2 = ScenarioConfig(cfg1.state, cfg1.alice, cfg1.bob, (Charlie(c.settings, Sharpness(1e-9)), c))
    np.testing.assert_allclose(correlation_table(cfg2, 2).as_list(), correlation_table(cfg1, 1).as_list(), atol=1e-6)


@pytest.mark.parametrize("lam", [0.1, 0.525, 0.8, 1.0])
def test_second_charlie_scaling_against_oracle(lam):
    cfg = paper_scenario("mermin", [lam, 1.0])
    first = [v / lam for v in oracle_correlation_table(cfg, 1).as_list()]
    second = oracle_correlation_table(cfg, 2).as_list()
    factor = (1 + math.sqrt(1 - lam**2)) / 2
    np.testing.assert_allclose(second, [factor * v for v in first], atol=1e-12)


def test_m_out_of_range(ghz):
    cfg = paper_scenario("mermin", [1.0])
    with pytest.raises(ValueError, match="out of range"):
        avg_correlation(cfg, 2, 0, 0, 0)


# inequality values


def test_mermin_quantum_max():
    assert mermin_value(paper_scenario("mermin", [1.0]), 1) == pytest.approx(4, abs=1e-9)


def test_svetlichny_quantum_max():
    assert svetlichny_value(paper_scenario("svetlichny", [1.0]), 1) == pytest.approx(4 * math.sqrt(2), abs=1e-9)


def test_mermin_two_and_three_charlies():
    vals = evaluate(paper_scenario("mermin", [0.525, 1.0])).values("mermin")
    assert vals == pytest.approx([2.10, 3.70], abs=0.01)
    vals = evaluate(paper_scenario("mermin", [0.525, 0.567, 1.0])).values("mermin")
    assert vals == pytest.approx([2.10, 2.10, 3.38], abs=0.01)


def test_svetlichny_two_and_three_charlies():
    vals = evaluate(paper_scenario("svetlichny", [0.7425, 1.0])).values("svetlichny")
    assert vals == pytest.approx([4.20, 4.72], abs=0.01)
    vals = evaluate(paper_scenario("svetlichny", [0.7071, 0.8284, 1.0])).values("svetlichny")
    assert vals == pytest.approx([4.00, 4.00, 3.77], abs=0.01)


def test_unswapped_alice_order_gives_zero_svetlichny(ghz):
    # y-first Alice pair as listed next to the Svetlichny expression
    s = PAPER_MERMIN_SETTINGS
    c = PartySettings(BlochDirection(HP, math.pi / 4), BlochDirection(HP, 3 * math.pi / 4))
    cfg = ScenarioConfig(ghz, s, s, (Charlie(c, Sharpness(1.0)),))
    assert svetlichny_value(cfg, 1) == pytest.approx(0, abs=1e-12)


# oracle


def test_oracle_single_step_is_born_rule(ghz):
    cfg = paper_scenario("mermin", [1.0])
    for choice in itertools.product((0, 1), repeat=3):
        dist = oracle_joint_distribution(cfg, choice)
        for outcome, p in dist.items():
            assert p == pytest.approx(joint_probability(cfg, choice, outcome), abs=1e-12)


def test_oracle_bound():
    cfg = paper_scenario("mermin", [0.5] * 6 + [1.0])
    with pytest.raises(ValueError, match="oracle enumeration bound exceeded"):
        oracle_joint_distribution(cfg, (0,) * 9)


def test_oracle_equivalence_random():
    rep = checks.oracle_equivalence(np.random.default_rng(5), draws=10)
    assert rep.passed, rep


def test_no_signalling_random():
    rep = checks.no_signalling(np.random.default_rng(6), draws=10)
    assert rep.passed, rep


def test_temporal_signalling_exists():
    assert checks.temporal_signalling_witness(1.0) > 0.01


def test_charlie_marginal_signalling_on_w(w_state):
    # W has a z-polarised C marginal; a sharp x measurement by Charlie 1 erases it
    c1 = PartySettings(Z, X)
    c2 = PartySettings(Z, Z)
    cfg = ScenarioConfig(w_state, PAPER_MERMIN_SETTINGS, PAPER_MERMIN_SETTINGS, (Charlie(c1, Sharpness(1.0)), Charlie(c2, Sharpness(1.0))))
    p = [sum(pr for o, pr in oracle_joint_distribution(cfg, (0, 0, k, 0)).items() if o[3] == 1) for k in (0, 1)]
    assert p[0] == pytest.approx(2 / 3, abs=1e-12)
    assert p[1] == pytest.approx(1 / 2, abs=1e-12)


def test_states_along_chain_valid(rng):
    for _ in range(10):
        post_states(checks.random_config(rng), validate=True)


# Bloch-map route


def test_heisenberg_matches_recursion(rng):
    for _ in range(20):
        cfg = checks.random_config(rng, n_max=5)
        for kind in ("mermin", "svetlichny"):
            np.testing.assert_allclose(heisenberg_values(cfg, kind), evaluate(cfg).values(kind), atol=1e-12)


# closed-form chain


def test_chain_matches_simulation(rng):
    assert checks.analytic_chain_agreement(rng, draws=10) < 1e-9


@pytest.mark.parametrize(
    "kind, thresholds, expected",
    [("mermin", [2.05] * 6, 1.49), ("mermin", [2.00] * 6, 1.76), ("svetlichny", [4.20, 4.20], 3.44)],
)
def test_analytic_chain_paper_values(kind, thresholds, expected):
    lambdas, final = analytic_chain(kind, thresholds)
    assert final == pytest.approx(expected, abs=0.01)
    assert lambdas[-1] == 1.0
    np.testing.assert_allclose(chain_values(kind, lambdas)[:-1], thresholds, atol=1e-12)


def test_analytic_chain_infeasible():
    with pytest.raises(ValueError, match="infeasible"):
        analytic_chain("svetlichny", [4.2, 4.2, 4.2])


def test_monotone_degradation():
    lams = [0.6, 0.7, 0.8, 1.0]
    vals = evaluate(paper_scenario("mermin", lams)).values("mermin")
    for m in range(3):
        sharp_next = vals[m] / lams[m] * (1 + math.sqrt(1 - lams[m] ** 2)) / 2
        assert vals[m + 1] / lams[m + 1] == pytest.approx(sharp_next, abs=1e-12)
        assert sharp_next <= vals[m] / lams[m]


def test_report_bounds(rng):
    for _ in range(10):
        rep = evaluate(checks.random_config(rng))
        for row in rep.rows:
            assert 0 <= row.mermin <= 4 + 1e-9
            assert 0 <= row.svetlichny <= 4 * math.sqrt(2) + 1e-9
