"""Finite-statistics calculators and Monte Carlo abort-rate experiments."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.stats import binomtest

from . import protocol

BOUNDS_SCHEMA = "diqss-bounds/1"

SIGN_NOTE = (
    "epsilon_complete uses exp(-2 eta^2), the sign the Hoeffding step requires; "
    "epsilon_complete_printed_sign keeps exp(+2 eta^2) for comparison and always exceeds 1"
)


def epsilon_correct(ec_length: int, d: int) -> float:
    if ec_length < 1:
        raise ValueError("hash tag length must be at least 1")
    return float(d) ** (-ec_length)


def min_ec_length(eps_cor: float, d: int) -> int:
    """Shortest tag length with ``d**-length <= eps_cor``."""
    if not 0 < eps_cor < 1:
        raise ValueError("eps_cor must lie in (0, 1)")
    length = max(1, math.ceil(math.log(1 / eps_cor, d) - 1e-12))
    while d**-length > eps_cor:
        length += 1
    return length


def p_test_bound(mu: float, eta: float, rounds: int, sign: int = -1) -> float:
    return (1 - mu * (1 - math.exp(sign * 2 * eta**2))) ** rounds


def epsilon_complete(mu: float, eta: float, rounds: int) -> float:
    """``(1 - mu (1 - exp(-2 eta^2)))^M + eta``, an upper bound on the honest abort rate."""
    if not 0 < mu < 1 or eta <= 0 or rounds < 1:
        raise ValueError("need 0 < mu < 1, eta > 0 and M >= 1")
    return p_test_bound(mu, eta, rounds) + eta


def epsilon_complete_printed_sign(mu: float, eta: float, rounds: int) -> float:
    return p_test_bound(mu, eta, rounds, sign=+1) + eta


def hoeffding_delta(eps_test: float, test_rounds: int) -> float:
    if not 0 < eps_test < 1 or test_rounds < 1:
        raise ValueError("need 0 < eps_test < 1 and T >= 1")
    return math.sqrt(math.log(1 / eps_test) / (2 * test_rounds))


def serfling_lambda(rounds: int, test_rounds: int, eps_qss: float) -> float:
    if not 1 <= test_rounds < rounds:
        raise ValueError(f"need 1 <= T < M, got T={test_rounds}, M={rounds}")
    if not 0 < eps_qss < 1:
        raise ValueError("eps_qss must lie in (0, 1)")
    M, T = rounds, test_rounds
    return math.sqrt(M * (T + 1) / (2 * T**2 * (M - T)) * math.log(1 / eps_qss))


@dataclass
class BoundsReport:
    epsilon_cor: float
    epsilon_complete: float
    epsilon_complete_printed_sign: float
    p_test_bound: float
    delta: float
    lam: float
    mu: float
    eta: float
    rounds: int
    test_rounds: int
    ec_length: int
    d: int
    eps_test: float
    eps_qss: float
    note: str = SIGN_NOTE

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        out["schema"] = BOUNDS_SCHEMA
        return out


def bounds_report(
    mu: float,
    eta: float,
    rounds: int,
    ec_length: int,
    d: int,
    test_rounds: int | None = None,
    eps_test: float = 0.01,
    eps_qss: float = 0.01,
) -> BoundsReport:
    if test_rounds is None:
        test_rounds = max(1, min(rounds - 1, round(mu * rounds)))
    return BoundsReport(
        epsilon_cor=epsilon_correct(ec_length, d),
        epsilon_complete=epsilon_complete(mu, eta, rounds),
        epsilon_complete_printed_sign=epsilon_complete_printed_sign(mu, eta, rounds),
        p_test_bound=p_test_bound(mu, eta, rounds),
        delta=hoeffding_delta(eps_test, test_rounds),
        lam=serfling_lambda(rounds, test_rounds, eps_qss),
        mu=mu,
        eta=eta,
        rounds=rounds,
        test_rounds=test_rounds,
        ec_length=ec_length,
        d=d,
        eps_test=eps_test,
        eps_qss=eps_qss,
    )


def wilson_interval(count: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(count, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def trial_seed(master: int, trial: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=(trial,)).generate_state(1, np.uint64)[0] >> 1)


def _one_trial(args) -> tuple[str, float | None]:
    config, seed = args
    result, _ = protocol.run(replace(config, seed=seed))
    return result.aborted, result.C


@dataclass
class AbortRateReport:
    trials: int
    test_aborts: int
    ec_aborts: int
    abort_rate: float
    test_abort_rate: float
    ec_abort_rate: float
    abort_ci: tuple[float, float]
    test_abort_ci: tuple[float, float]
    ec_abort_ci: tuple[float, float]
    mean_C: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def abort_rate_experiment(
    config: protocol.ProtocolConfig, trials: int, master_seed: int | None = None, workers: int = 1
) -> AbortRateReport:
    """Run the protocol ``trials`` times with independent derived seeds."""
    if trials < 1:
        raise ValueError("need at least one trial")
    master = config.seed if master_seed is None else master_seed
    jobs = [(config, trial_seed(master, t)) for t in range(trials)]
    if workers <= 1:
        outcomes = [_one_trial(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_one_trial, jobs))
    test = sum(a == "test-abort" for a, _ in outcomes)
    ec = sum(a == "ec-abort" for a, _ in outcomes)
    cs = [c for _, c in outcomes if c is not None]
    return AbortRateReport(
        trials=trials,
        test_aborts=test,
        ec_aborts=ec,
        abort_rate=(test + ec) / trials,
        test_abort_rate=test / trials,
        ec_abort_rate=ec / trials,
        abort_ci=wilson_interval(test + ec, trials),
        test_abort_ci=wilson_interval(test, trials),
        ec_abort_ci=wilson_interval(ec, trials),
        mean_C=float(np.mean(cs)) if cs else None,
    )
