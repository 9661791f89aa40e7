"""The N-player d-outcome XOR game built on the Bell functional.

Players get uniform bits ``x_k`` and answer dits ``a_k``; they win iff the
input has even weight and ``sum a_k = f(x) (mod d)``. For any behavior the
win probability equals ``(1 + B) / (2d)`` where ``B`` is its Bell value.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import bell, quantum
from .ditmath import GameInput, all_inputs, f_exponent, phase

ClassicalStrategy = bell.LhvAssignment
Correlator = Callable[[tuple[int, ...], int], complex]


@dataclass(frozen=True)
class GameSpec:
    n: int
    d: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"the game needs N >= 2 players, got {self.n}")
        if self.d < 2 or self.d % 2:
            raise ValueError(f"the game is defined for even d >= 2, got {self.d}")


def win(x: Union[GameInput, Sequence[int]], a: Sequence[int], d: int) -> bool:
    bits = x.bits if isinstance(x, GameInput) else tuple(x)
    if len(bits) != len(a):
        raise ValueError(f"input has {len(bits)} entries but answer has {len(a)}")
    j = f_exponent(bits, d)
    return j is not None and sum(a) % d == j


def win_table(n: int, d: int) -> np.ndarray:
    """``(2**n, d**n)`` boolean table ``win(x, a)`` in flat index order."""
    sums = quantum.outcome_digits(n, d).sum(axis=1) % d
    table = np.zeros((2**n, d**n), dtype=bool)
    for i, bits in enumerate(all_inputs(n)):
        j = f_exponent(bits, d)
        if j is not None:
            table[i] = sums == j
    return table


def win_prob_given(probs: np.ndarray, bits: Sequence[int], d: int) -> float:
    """Probability of winning on input ``bits`` given a flat outcome distribution."""
    n = len(bits)
    j = f_exponent(bits, d)
    if j is None:
        return 0.0
    sums = quantum.outcome_digits(n, d).sum(axis=1) % d
    return float(probs[sums == j].sum())


def quantum_win_prob(spec: GameSpec) -> float:
    """Born-rule enumeration of the GHZ strategy, independent of the character algebra."""
    n, d = spec.n, spec.d
    quantum.check_cap(n, d)
    total = 0.0
    for bits in all_inputs(n):
        total += win_prob_given(quantum.ghz_probabilities(n, d, bits), bits, d)
    return total / 2**n


def quantum_correlator(spec: GameSpec) -> Correlator:
    state = quantum.ghz(spec.n, spec.d)
    return lambda bits, p: quantum.product_correlator(state, bits, p)


def win_prob_via_characters(
    spec: GameSpec, correlator: Correlator | None = None, constant: str = "corrected"
) -> float:
    """Character expansion of the win probability over Z_d.

    ``constant="corrected"`` counts the trivial character only over inputs
    with a defined target, giving ``1/(2d)``; ``constant="flat"`` uses a
    flat ``1/d`` for every input and overshoots by ``1/(2d)``, landing on
    :func:`paper_win_prob`.
    """
    n, d = spec.n, spec.d
    if correlator is None:
        correlator = quantum_correlator(spec)
    if constant == "corrected":
        base = 1.0 / (2 * d)
    elif constant == "flat":
        base = 1.0 / d
    else:
        raise ValueError(f"unknown constant mode {constant!r}")
    acc = 0j
    for bits in all_inputs(n):
        j = f_exponent(bits, d)
        if j is None:
            continue
        for p in range(1, d):
            # chi_p(j) = omega^{-p j}
            acc += phase(-2 * p * j, d) * correlator(bits, p)
    value = base + acc / (d * 2**n)
    if abs(value.imag) > 1e-9:
        raise ArithmeticError(f"win probability has imaginary residue {value.imag:.3e}")
    return float(value.real)


def paper_win_prob(d: int) -> float:
    return (1 + (d - 1) / 2) / d


def strategy_win_prob(strategy: ClassicalStrategy, spec: GameSpec) -> float:
    wins = sum(win(bits, strategy.respond(bits), spec.d) for bits in all_inputs(spec.n))
    return wins / 2**spec.n


def _count_wins(args) -> tuple[int, int]:
    n, d, start, stop = args
    valid = [(bits, f_exponent(bits, d)) for bits in all_inputs(n)]
    valid = [(bits, j) for bits, j in valid if j is not None]
    cols = np.array([[2 * k + x for k, x in enumerate(bits)] for bits, _ in valid])
    targets = np.array([j for _, j in valid])
    radix = d ** np.arange(2 * n - 1, -1, -1, dtype=np.int64)
    best_wins, best_idx = -1, -1
    for lo in range(start, stop, 1 << 16):
        idx = np.arange(lo, min(lo + (1 << 16), stop), dtype=np.int64)
        digits = (idx[:, None] // radix) % d
        answers = digits[:, cols].sum(axis=2) % d
        wins = (answers == targets).sum(axis=1)
        i = int(np.argmax(wins))
        if wins[i] > best_wins:
            best_wins, best_idx = int(wins[i]), int(idx[i])
    return best_wins, best_idx


def classical_win_maximize(spec: GameSpec, workers: int = 1) -> tuple[float, ClassicalStrategy]:
    """Best deterministic strategy by exhaustive search over all ``d**(2N)`` of them.

    Shared randomness is a convex mixture of deterministic strategies and
    cannot do better, so this is the classical value of the game.
    """
    n, d = spec.n, spec.d
    size = d ** (2 * n)
    if size > bell.SEARCH_CAP:
        raise bell.SearchCapExceeded(f"d**(2N) = {size} strategies exceeds search cap {bell.SEARCH_CAP}")
    if workers <= 1 or size <= 1 << 16:
        wins, index = _count_wins((n, d, 0, size))
    else:
        from concurrent.futures import ProcessPoolExecutor

        edges = np.linspace(0, size, workers + 1).astype(int)
        jobs = [(n, d, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_count_wins, jobs))
        wins, index = results[0]
        for w, i in results[1:]:
            if w > wins:
                wins, index = w, i
    return wins / 2**n, ClassicalStrategy.from_index(index, n, d)


def simulate_rounds(
    spec: GameSpec,
    strategy: Union[str, ClassicalStrategy, quantum.SourceModel],
    rounds: int,
    rng: np.random.Generator,
) -> float:
    """Empirical win rate over ``rounds`` i.i.d. plays with uniform inputs."""
    if rounds < 1:
        raise ValueError("need at least one round")
    n, d = spec.n, spec.d
    if isinstance(strategy, str):
        if strategy != "quantum":
            raise ValueError(f"unknown strategy {strategy!r}")
        strategy = quantum.SourceModel(n, d, 1.0)
    inputs = rng.integers(0, 2, size=(rounds, n))
    if isinstance(strategy, ClassicalStrategy):
        wins = sum(win(tuple(x), strategy.respond(x), d) for x in inputs)
        return wins / rounds
    wins = 0
    for x in inputs:
        wins += win(tuple(x), quantum.sample(strategy, x, rng), d)
    return wins / rounds


@dataclass
class GameReport:
    n: int
    d: int
    quantum_win_prob: float
    characters_win_prob: float
    characters_flat_constant: float
    classical_win_max: float
    classical_strategy: list[list[int]]
    paper_win_prob: float
    bell_quantum_value: float
    lhv_max: float
    fourier_quantum_ok: bool
    fourier_classical_ok: bool
    discrepancy: bool

    def to_dict(self) -> dict:
        return asdict(self)


def game_report(spec: GameSpec, workers: int = 1, tol: float = 1e-9) -> GameReport:
    n, d = spec.n, spec.d
    q = quantum_win_prob(spec)
    c, strat = classical_win_maximize(spec, workers)
    bq = bell.bell_quantum_value(n, d)
    lhv, _ = bell.lhv_maximize(n, d, "main", workers)
    paper = paper_win_prob(d)
    return GameReport(
        n=n,
        d=d,
        quantum_win_prob=q,
        characters_win_prob=win_prob_via_characters(spec),
        characters_flat_constant=win_prob_via_characters(spec, constant="flat"),
        classical_win_max=c,
        classical_strategy=[list(p) for p in strat.values],
        paper_win_prob=paper,
        bell_quantum_value=bq,
        lhv_max=lhv,
        fourier_quantum_ok=abs(q - (1 + bq) / (2 * d)) <= tol,
        fourier_classical_ok=abs(c - (1 + lhv) / (2 * d)) <= tol,
        discrepancy=abs(paper - q) > tol,
    )
