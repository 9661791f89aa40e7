"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
written straight to the terminal even under output capture.
"""

import json
import math
import time

import numpy as np
import pytest

from diqss import adversary, analysis, bell, cli, game, protocol, quantum
from diqss.hashing import hash_apply, hash_sample

BELL_SET = [(2, 2), (3, 2), (4, 2), (2, 4), (3, 4), (3, 6)]


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}")
        assert ok, detail

    return emit


def _sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


def test_criterion_01_quantum_bell_value(report):
    start = time.perf_counter()
    worst = max(
        abs(bell.bell_quantum_value(n, d, conv) - (d - 1)) for n, d in BELL_SET for conv in bell.CONVENTIONS
    )
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-9 and elapsed < 10, f"max |B_q - (d-1)| = {worst:.1e}, {elapsed:.2f} s")


def test_criterion_02_classical_bounds(report):
    start = time.perf_counter()
    expected = {(2, 2): 1.0, (3, 2): 0.5, (4, 2): 0.5, (3, 4): 2.0}
    ok, notes = True, []
    for n, d in BELL_SET + [(4, 4)]:
        lhv, _ = bell.lhv_maximize(n, d)
        bound = bell.classical_bound(n, d)
        ok &= lhv <= bound + 1e-9
        if (n, d) in expected:
            ok &= abs(lhv - expected[(n, d)]) <= 1e-9
        gap = bound - lhv
        notes.append(f"({n},{d}) {lhv:g}" + (f" gap {gap:.3g}" if gap > 1e-9 else ""))
    elapsed = time.perf_counter() - start
    report(2, ok and elapsed < 60, f"lhv_max {', '.join(notes)}; {elapsed:.2f} s")


def test_criterion_03_fourier_identity(report):
    worst = 0.0
    count = 0
    for n, d in [(2, 2), (3, 2), (3, 4)]:
        spec = game.GameSpec(n, d)
        for idx in range(d ** (2 * n)):
            s = bell.LhvAssignment.from_index(idx, n, d)
            worst = max(worst, abs(game.strategy_win_prob(s, spec) - (1 + bell.bell_of_assignment(s, n, d)) / (2 * d)))
            count += 1
        q = game.quantum_win_prob(spec)
        worst = max(worst, abs(q - (1 + bell.bell_quantum_value(n, d)) / (2 * d)))
    report(3, worst <= 1e-9, f"{count} strategies + quantum, max deviation {worst:.1e}")


def test_criterion_04_game_values(report):
    ok = True
    for n, d in [(2, 2), (3, 2), (4, 2), (2, 4), (3, 4), (3, 6)]:
        ok &= abs(game.quantum_win_prob(game.GameSpec(n, d)) - 0.5) <= 1e-9
    reports = {nd: game.game_report(game.GameSpec(*nd)) for nd in [(2, 2), (3, 2), (4, 2)]}
    expected = {(2, 2): 0.5, (3, 2): 0.375, (4, 2): 0.375}
    for nd, r in reports.items():
        ok &= abs(r.classical_win_max - expected[nd]) <= 1e-12
        ok &= r.paper_win_prob == 0.75 and r.discrepancy
    detail = ", ".join(f"{nd} classical {r.classical_win_max:g} paper {r.paper_win_prob:g}" for nd, r in reports.items())
    report(4, ok, f"quantum 0.5 everywhere; {detail}; discrepancy flagged")


def test_criterion_05_valid_input_certainty(report):
    worst = 0.0
    for n, d in [(3, 2), (3, 4)]:
        for bits in np.ndindex(*(2,) * n):
            if sum(bits) % 2 == 0:
                p = game.win_prob_given(quantum.ghz_probabilities(n, d, bits), bits, d)
                worst = max(worst, abs(p - 1))
    report(5, worst <= 1e-9, f"max |Pr(win|x) - 1| = {worst:.1e}")


@pytest.mark.slow
def test_criterion_06_perfect_reconstruction(report):
    ok, notes = True, []
    for d in (2, 4):
        session = protocol.Session(protocol.ProtocolConfig(n=3, d=d, rounds=102000, mu=0.01, seed=d))
        result = session.execute()
        protocol.audit_isolation(session)
        keys = session.transcript.key_rounds()
        sums = np.zeros(len(keys), dtype=np.int64)
        for lab in session.labs:
            sums += np.array([lab.key_outcome(i) for i in keys])
        violations = int(np.count_nonzero(sums % d))
        ok &= result.aborted == "no" and result.key_round_errors == 0 and violations == 0 and len(keys) >= 10**5
        notes.append(f"d={d}: {len(keys)} key rounds, {result.key_round_errors} failures, {violations} sum violations")
    report(6, ok, "; ".join(notes))


@pytest.mark.slow
def test_criterion_07_detection(report):
    start = time.perf_counter()
    best = game.classical_win_maximize(game.GameSpec(3, 2))[1]
    base = protocol.ProtocolConfig(n=3, d=2, rounds=600, mu=0.5, eta=0.05,
                                   attack=adversary.AttackModel.deterministic_devices(best))
    exp = analysis.abort_rate_experiment(base, 100, master_seed=2024)
    aborts = exp.test_aborts + exp.ec_aborts

    checks = []
    for model, target, seed in [
        (adversary.AttackModel.intercept_resend([0]), 0.25, 31),
        (adversary.AttackModel.white_noise(0.8), 0.45, 32),
    ]:
        cfg = protocol.ProtocolConfig(n=3, d=2, rounds=20000, mu=0.5, eta=0.05, seed=seed, attack=model)
        result, _ = protocol.run(cfg)
        z = abs(result.C - target) / _sigma(target, result.test_rounds)
        checks.append((model.describe(), result.C, z))
    elapsed = time.perf_counter() - start
    ok = aborts >= 99 and all(z <= 3 for _, _, z in checks) and elapsed < 300
    detail = f"classical best aborted {aborts}/100; " + "; ".join(
        f"{name} C={c:.4f} ({z:.2f} sigma)" for name, c, z in checks
    )
    report(7, ok, f"{detail}; {elapsed:.1f} s")


@pytest.mark.slow
def test_criterion_08_honest_completeness(report):
    cfg = protocol.ProtocolConfig(n=3, d=2, rounds=200, mu=0.5, eta=0.1)
    exp = analysis.abort_rate_experiment(cfg, 200, master_seed=8)
    bound = analysis.epsilon_complete(0.5, 0.1, 200)
    lo, hi = exp.abort_ci
    report(8, hi <= bound, f"abort rate {exp.abort_rate:.3f}, 95% Wilson upper {hi:.4f} <= bound {bound:.4f}")


def test_criterion_09_hash_correctness(report):
    notes = []
    ok = analysis.epsilon_correct(10, 2) == 9.765625e-4
    for d, m, seed in [(2, 10, 90), (4, 5, 91)]:
        rng = np.random.default_rng(seed)
        pairs, hits = 10**4, 0
        for _ in range(pairs):
            s = rng.integers(0, d, 64)
            t = rng.integers(0, d, 64)
            while np.array_equal(s, t):
                t = rng.integers(0, d, 64)
            h = hash_sample(d, 64, m, rng)
            hits += hash_apply(h, s) == hash_apply(h, t)
        b = float(d) ** -m
        limit = b + 3 * _sigma(b, pairs)
        ok &= hits / pairs <= limit
        notes.append(f"d={d} m={m}: {hits}/{pairs} collisions <= {limit:.2e}")
    report(9, ok, "; ".join(notes) + "; epsilon_correct(10, 2) = 2^-10")


def test_criterion_10_calculators(report):
    delta = analysis.hoeffding_delta(0.01, 200)
    lam = analysis.serfling_lambda(1000, 500, 0.01)
    eps = analysis.epsilon_complete(0.5, 0.1, 1000)
    ok = abs(delta - 0.10730) <= 1e-5 and abs(lam - 0.09607) <= 1e-5 and abs(eps - 0.100048) <= 1e-6
    report(10, ok, f"delta {delta:.6f}, lambda {lam:.6f}, epsilon_complete {eps:.7f}")


def test_criterion_11_determinism(report, capsys):
    code = cli.main(["verify", "--json", "--no-timestamp"])
    verify_doc = json.loads(capsys.readouterr().out)
    outputs = []
    for _ in range(2):
        batch = []
        for argv in (
            ["run", "--seed", "5", "--attack", "noise:v=0.95", "--workers", "2"],
            ["abort-rate", "--trials", "10", "--seed", "5"],
            ["bell", "--n", "3", "--d", "4"],
        ):
            cli.main(argv + ["--json", "--no-timestamp"])
            batch.append(capsys.readouterr().out)
        outputs.append(batch)
    identical = outputs[0] == outputs[1]
    ok = code == 0 and verify_doc["report"]["failed"] == 0 and identical
    report(11, ok, f"verify exit {code} ({verify_doc['report']['passed']} checks), repeated reports identical: {identical}")
