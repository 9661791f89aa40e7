"""Oracle-equivalence checks run by ``diqss verify``.

Each check pairs a computed quantity with an independently obtained one
(brute force, Born-rule enumeration, a second evaluation path) and records
whether they agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, exp
from typing import Callable

import numpy as np

from . import adversary, analysis, bell, game, protocol, quantum
from .ditmath import Dit, all_inputs, chi, phase

BELL_CASES = [(2, 2), (3, 2), (4, 2), (2, 4), (3, 4), (3, 6)]
TOL = 1e-9


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _characters() -> tuple[bool, str]:
    worst = 0.0
    for d in range(2, 9):
        for n in range(d):
            for j in range(d):
                for k in range(d):
                    lhs = chi(n, Dit(j, d)) * chi(n, Dit(k, d))
                    worst = max(worst, abs(lhs - chi(n, Dit((j + k) % d, d))))
        for j in range(d):
            s = sum(chi(n, Dit(j, d)) for n in range(d))
            worst = max(worst, abs(s - (d if j == 0 else 0)))
    return worst <= TOL, f"max deviation {worst:.2e}"


def _observables() -> tuple[bool, str]:
    worst = 0.0
    for d in range(2, 9):
        for sign in (quantum.MAIN, quantum.APPENDIX_A):
            for s in (0, 1):
                basis = np.array(quantum.measurement_basis(s, d, sign))
                worst = max(worst, np.abs(basis.conj() @ basis.T - np.eye(d)).max())
                P = quantum.observable(s, d, sign)
                worst = max(worst, np.abs(np.linalg.matrix_power(P, d) - np.eye(d)).max())
                for n in range(1, d):
                    spectral = sum(phase(2 * n * a, d) * np.outer(basis[a], basis[a].conj()) for a in range(d))
                    worst = max(worst, np.abs(spectral - np.linalg.matrix_power(P, n)).max())
    return worst <= TOL, f"max deviation {worst:.2e}"


def _ghz_support() -> tuple[bool, str]:
    bad = 0
    for n, d in [(2, 2), (3, 2), (3, 4), (4, 2), (3, 6)]:
        probs = quantum.ghz_probabilities(n, d, (0,) * n)
        sums = quantum.outcome_digits(n, d).sum(axis=1) % d
        expected = np.where(sums == 0, 1 / d ** (n - 1), 0.0)
        bad += int(np.abs(probs - expected).max() > TOL)
    return bad == 0, f"{bad} instances off the 1/d^(N-1) support law"


def _correlator_paths() -> tuple[bool, str]:
    worst = 0.0
    for n, d in [(2, 2), (3, 2), (3, 4), (2, 6)]:
        state = quantum.ghz(n, d)
        for bits in all_inputs(n):
            probs = quantum.ghz_probabilities(n, d, bits)
            for p in range(1, d):
                a = quantum.product_correlator(state, bits, p)
                b = quantum.correlator_from_distribution(probs, n, d, p)
                worst = max(worst, abs(a - b))
    return worst <= TOL, f"max deviation {worst:.2e}"


def _bell_quantum() -> tuple[bool, str]:
    worst = 0.0
    for n, d in BELL_CASES:
        for conv in bell.CONVENTIONS:
            worst = max(worst, abs(bell.bell_quantum_value(n, d, conv) - (d - 1)))
            corr = bell._quantum_correlator(n, d, conv)
            worst = max(worst, abs(bell.bell_value_expanded(corr, n, d, conv) - (d - 1)))
    return worst <= TOL, f"max |B_q - (d-1)| {worst:.2e}"


def _bell_classical(workers: int) -> tuple[bool, str]:
    notes = []
    ok = True
    for n, d in BELL_CASES:
        lhv, _ = bell.lhv_maximize(n, d, workers=workers)
        bound = bell.classical_bound(n, d)
        ok &= lhv <= bound + TOL
        notes.append(f"({n},{d}) {lhv:g}/{bound:g}")
    return ok, "lhv_max/formula " + ", ".join(notes)


def _fourier_identity() -> tuple[bool, str]:
    worst = 0.0
    for n, d in [(2, 2), (3, 2), (3, 4)]:
        spec = game.GameSpec(n, d)
        for idx in range(d ** (2 * n)):
            s = bell.LhvAssignment.from_index(idx, n, d)
            worst = max(worst, abs(game.strategy_win_prob(s, spec) - (1 + bell.bell_of_assignment(s, n, d)) / (2 * d)))
        q = game.quantum_win_prob(spec)
        worst = max(worst, abs(q - (1 + bell.bell_quantum_value(n, d)) / (2 * d)))
    return worst <= TOL, f"max deviation {worst:.2e}"


def _classical_game(workers: int) -> tuple[bool, str]:
    worst = 0.0
    for n, d in [(2, 2), (3, 2), (4, 2), (3, 4)]:
        c, _ = game.classical_win_maximize(game.GameSpec(n, d), workers)
        lhv, _ = bell.lhv_maximize(n, d, workers=workers)
        worst = max(worst, abs(c - (1 + lhv) / (2 * d)))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def _characters_vs_born() -> tuple[bool, str]:
    worst = 0.0
    for n, d in [(2, 2), (3, 2), (2, 4), (3, 4)]:
        spec = game.GameSpec(n, d)
        worst = max(worst, abs(game.win_prob_via_characters(spec) - game.quantum_win_prob(spec)))
    return worst <= TOL, f"max deviation {worst:.2e}"


def _valid_input_certainty() -> tuple[bool, str]:
    worst = 0.0
    for n, d in [(3, 2), (3, 4)]:
        for bits in all_inputs(n):
            if sum(bits) % 2 == 0:
                p = game.win_prob_given(quantum.ghz_probabilities(n, d, bits), bits, d)
                worst = max(worst, abs(p - 1))
    return worst <= TOL, f"max |Pr(win|x) - 1| {worst:.2e}"


def _attacks() -> tuple[bool, str]:
    n, d = 3, 2
    best = game.classical_win_maximize(game.GameSpec(n, d))
    cases = [
        (adversary.AttackModel.none(), 0.5),
        (adversary.AttackModel.white_noise(0.8), 0.45),
        (adversary.AttackModel.intercept_resend([0]), 0.25),
        (adversary.AttackModel.deterministic_devices(best[1]), best[0]),
    ]
    worst = max(abs(adversary.predicted_C(m, n, d) - v) for m, v in cases)
    return worst <= TOL, f"max deviation {worst:.2e}"


def _completeness_sum() -> tuple[bool, str]:
    worst = 0.0
    for mu in (0.1, 0.5, 0.9):
        for eta in (0.05, 0.1, 0.3):
            for M in (10, 100, 400):
                q = exp(-2 * eta**2)
                direct = sum(comb(M, j) * mu**j * (1 - mu) ** (M - j) * q**j for j in range(M + 1))
                worst = max(worst, abs(direct - analysis.p_test_bound(mu, eta, M)))
    return worst <= TOL, f"binomial sum vs closed form {worst:.2e}"


def _protocol_roundtrip(workers: int) -> tuple[bool, str]:
    cfg = protocol.ProtocolConfig(n=3, d=4, rounds=2000, mu=0.2, seed=11)
    session = protocol.Session(cfg)
    result = session.execute()
    protocol.audit_isolation(session)
    again, _ = protocol.run(cfg, workers=max(workers, 2))
    ok = result.aborted == "no" and result.key_round_errors == 0 and again == result
    return ok, f"aborted={result.aborted}, errors={result.key_round_errors}"


def checks(workers: int = 1) -> list[tuple[str, Callable[[], tuple[bool, str]]]]:
    return [
        ("character homomorphism and orthogonality", _characters),
        ("bases orthonormal, P^d = I, spectral powers", _observables),
        ("GHZ all-X support law", _ghz_support),
        ("correlator operator path = distribution path", _correlator_paths),
        ("quantum Bell value = d-1 (both forms, both conventions)", _bell_quantum),
        ("LHV brute force <= classical bound formula", lambda: _bell_classical(workers)),
        ("win probability = (1+B)/(2d) for every strategy", _fourier_identity),
        ("classical game max = (1+lhv_max)/(2d)", lambda: _classical_game(workers)),
        ("character expansion = Born enumeration", _characters_vs_born),
        ("quantum strategy wins every valid input", _valid_input_certainty),
        ("attack predictions", _attacks),
        ("completeness closed form = binomial sum", _completeness_sum),
        ("honest protocol round trip and determinism", lambda: _protocol_roundtrip(workers)),
    ]


def run_all(workers: int = 1) -> list[Check]:
    out = []
    for name, fn in checks(workers):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, bool(ok), detail))
    return out
