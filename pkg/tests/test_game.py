import numpy as np
import pytest

from diqss import bell, game, quantum
from diqss.ditmath import GameInput

import oracles


def test_win_examples():
    assert game.win((1, 1, 0), (1, 0, 0), 2)
    assert not game.win((1, 1, 0), (1, 1, 0), 2)
    assert not game.win((1, 0, 0), (0, 0, 0), 2)
    assert game.win(GameInput((0, 0, 0)), (1, 2, 1), 4)
    assert game.win((1, 1, 1, 1), (1, 1, 0, 0), 4)


def test_win_length_mismatch():
    with pytest.raises(ValueError):
        game.win((0, 0), (0, 0, 0), 2)


@pytest.mark.parametrize("n,d", [(1, 2), (3, 3), (2, 0)])
def test_game_spec_rejects(n, d):
    with pytest.raises(ValueError):
        game.GameSpec(n, d)


@pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (2, 4), (3, 4)])
def test_win_table_matches_oracle(n, d):
    table = game.win_table(n, d)
    outcomes = quantum.outcome_strings(n, d)
    for i, bits in enumerate(np.ndindex(*(2,) * n)):
        for k, a in enumerate(outcomes):
            assert table[i, k] == oracles.wins(bits, a, d)


@pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (4, 2), (2, 4), (3, 4), (2, 6), (3, 6)])
def test_quantum_win_prob_is_half(n, d):
    spec = game.GameSpec(n, d)
    assert game.quantum_win_prob(spec) == pytest.approx(0.5, abs=1e-9)
    if d**n <= 64:
        assert oracles.quantum_win_probability(n, d) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (2, 4), (3, 4)])
def test_character_expansion_matches_born(n, d):
    spec = game.GameSpec(n, d)
    assert game.win_prob_via_characters(spec) == pytest.approx(game.quantum_win_prob(spec), abs=1e-9)


@pytest.mark.parametrize("d", [2, 4, 6])
def test_flat_constant_gives_printed_value(d):
    # the flat 1/d constant lands exactly on the closed form 0.75, 0.625, 0.5833
    spec = game.GameSpec(3, d)
    assert game.win_prob_via_characters(spec, constant="flat") == pytest.approx(game.paper_win_prob(d), abs=1e-9)


def test_closed_form_values():
    assert game.paper_win_prob(2) == 0.75
    assert game.paper_win_prob(4) == 0.625
    assert game.paper_win_prob(6) == pytest.approx(7 / 12)


def test_unknown_constant():
    with pytest.raises(ValueError):
        game.win_prob_via_characters(game.GameSpec(2, 2), constant="x")


@pytest.mark.parametrize("d", [2, 4])
def test_uniform_behavior_gives_one_over_2d(d):
    spec = game.GameSpec(3, d)
    assert game.win_prob_via_characters(spec, correlator=lambda bits, p: 0j) == pytest.approx(1 / (2 * d))


@pytest.mark.parametrize("n,d,expected", [(2, 2, 0.5), (3, 2, 0.375), (4, 2, 0.375), (2, 4, 0.5), (3, 4, 0.375)])
def test_classical_max_matches_oracle(n, d, expected):
    value, strategy = game.classical_win_maximize(game.GameSpec(n, d))
    assert value == pytest.approx(expected)
    assert value == pytest.approx(oracles.best_classical(n, d))
    assert oracles.strategy_win_probability(strategy.values, n, d) == pytest.approx(value)


def test_classical_max_workers_agree():
    spec = game.GameSpec(3, 6)
    a = game.classical_win_maximize(spec)
    b = game.classical_win_maximize(spec, workers=3)
    assert a[0] == b[0] == pytest.approx(0.375)


@pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (3, 4)])
def test_fourier_identity_every_strategy(n, d):
    spec = game.GameSpec(n, d)
    for idx in range(d ** (2 * n)):
        s = bell.LhvAssignment.from_index(idx, n, d)
        lhs = game.strategy_win_prob(s, spec)
        assert lhs == pytest.approx((1 + bell.bell_of_assignment(s, n, d)) / (2 * d), abs=1e-9)


@pytest.mark.parametrize("n,d", [(3, 2), (3, 4)])
def test_valid_inputs_won_with_certainty(n, d):
    for bits in np.ndindex(*(2,) * n):
        p = game.win_prob_given(quantum.ghz_probabilities(n, d, bits), bits, d)
        if sum(bits) % 2 == 0:
            assert p == pytest.approx(1.0, abs=1e-9)
        else:
            assert p == 0.0


def _within_3sigma(empirical, p, rounds):
    return abs(empirical - p) <= 3 * oracles.binomial_sigma(p, rounds)


def test_simulate_quantum():
    rng = np.random.default_rng(5)
    assert _within_3sigma(game.simulate_rounds(game.GameSpec(3, 2), "quantum", 4000, rng), 0.5, 4000)


def test_simulate_classical():
    spec = game.GameSpec(3, 2)
    _, strategy = game.classical_win_maximize(spec)
    rng = np.random.default_rng(6)
    assert _within_3sigma(game.simulate_rounds(spec, strategy, 4000, rng), 0.375, 4000)


@pytest.mark.parametrize("d", [2, 4])
def test_simulate_maximally_mixed(d):
    spec = game.GameSpec(3, d)
    rng = np.random.default_rng(7)
    rate = game.simulate_rounds(spec, quantum.SourceModel(3, d, 0.0), 4000, rng)
    assert _within_3sigma(rate, 1 / (2 * d), 4000)


def test_simulate_rejects():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        game.simulate_rounds(game.GameSpec(2, 2), "bogus", 10, rng)
    with pytest.raises(ValueError):
        game.simulate_rounds(game.GameSpec(2, 2), "quantum", 0, rng)


def test_report_flags():
    r = game.game_report(game.GameSpec(3, 2))
    assert r.quantum_win_prob == pytest.approx(0.5)
    assert r.classical_win_max == pytest.approx(0.375)
    assert r.paper_win_prob == 0.75
    assert r.discrepancy
    assert r.fourier_quantum_ok and r.fourier_classical_ok
    assert r.characters_flat_constant == pytest.approx(0.75)
