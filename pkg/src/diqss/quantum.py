"""Dense state-vector simulation of N qudits in generalized X/Y product bases."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .ditmath import phase

DEFAULT_CAP = 2**22

# offset sign of the setting-1 basis: -(alpha - 1/2) in the main text,
# -(alpha + 1/2) in the appendix form of the Bell function
MAIN = 1
APPENDIX_A = -1


class CapExceeded(MemoryError):
    pass


def check_cap(n: int, d: int, cap: int = DEFAULT_CAP) -> None:
    if d**n > cap:
        raise CapExceeded(f"d**N = {d}**{n} = {d**n} amplitudes exceeds cap {cap}")


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    n: int
    d: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.d**self.n,):
            raise ValueError(f"expected {self.d**self.n} amplitudes, got shape {amps.shape}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: <psi|psi> = {norm}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.d,) * self.n)


@dataclass(frozen=True)
class SourceModel:
    n: int
    d: int
    visibility: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")


def ghz(n: int, d: int, cap: int = DEFAULT_CAP) -> StateVector:
    if n < 1 or d < 2:
        raise ValueError("need N >= 1 and d >= 2")
    check_cap(n, d, cap)
    amps = np.zeros(d**n, dtype=complex)
    # |a a ... a> sits at a * (d**n - 1) / (d - 1)
    step = (d**n - 1) // (d - 1)
    amps[np.arange(d) * step] = 1 / np.sqrt(d)
    return StateVector(amps, n, d)


@lru_cache(maxsize=None)
def _basis_matrix(setting: int, d: int, offset_sign: int) -> np.ndarray:
    # row alpha holds the components (1/sqrt d) omega^{-(alpha - s/2) beta}
    table = np.array([phase(k, d) for k in range(2 * d)])
    alpha = np.arange(d)[:, None]
    beta = np.arange(d)[None, :]
    num = -2 * alpha * beta + offset_sign * setting * beta
    m = table[num % (2 * d)] / np.sqrt(d)
    m.setflags(write=False)
    return m


def measurement_basis(setting: int, d: int, offset_sign: int = MAIN) -> list[np.ndarray]:
    """Eigenbasis of the setting-``setting`` observable, as unit column vectors."""
    if setting not in (0, 1):
        raise ValueError(f"setting must be 0 or 1, got {setting}")
    m = _basis_matrix(setting, d, offset_sign)
    return [m[a].copy() for a in range(d)]


def observable(setting: int, d: int, offset_sign: int = MAIN) -> np.ndarray:
    m = _basis_matrix(setting, d, offset_sign)
    eig = np.array([phase(2 * a, d) for a in range(d)])
    # sum_alpha omega^alpha |v_alpha><v_alpha|
    return (m.T * eig) @ m.conj()


def _analyzer(setting: int, d: int, offset_sign: int) -> np.ndarray:
    # <v_alpha| as rows: amplitude of outcome alpha is analyzer @ psi
    return _basis_matrix(setting, d, offset_sign).conj()


def apply_local(state: np.ndarray, ops: Sequence[np.ndarray], n: int, d: int) -> np.ndarray:
    """Apply ``ops[k]`` to qudit ``k`` of a flat amplitude vector."""
    t = state.reshape((d,) * n)
    for k, op in enumerate(ops):
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [k])), 0, k)
    return t.reshape(-1)


def _settings_tuple(settings: Sequence[int], n: int) -> tuple[int, ...]:
    s = tuple(int(x) for x in settings)
    if len(s) != n:
        raise ValueError(f"expected {n} settings, got {len(s)}")
    if any(x not in (0, 1) for x in s):
        raise ValueError(f"settings must be 0/1, got {s}")
    return s


def born_probabilities(
    amplitudes: np.ndarray, settings: Sequence[int], n: int, d: int, offset_sign: int = MAIN
) -> np.ndarray:
    """Flat array of ``|<v_a1 ... v_aN|psi>|^2`` indexed by the base-d outcome string.

    Works on unnormalized vectors too; the result then sums to the squared norm.
    """
    s = _settings_tuple(settings, n)
    amps = apply_local(np.asarray(amplitudes), [_analyzer(x, d, offset_sign) for x in s], n, d)
    return np.abs(amps) ** 2


def joint_distribution(
    state: StateVector, settings: Sequence[int], offset_sign: int = MAIN
) -> dict[tuple[int, ...], float]:
    probs = born_probabilities(state.amplitudes, settings, state.n, state.d, offset_sign)
    return {outcome: float(p) for outcome, p in zip(outcome_strings(state.n, state.d), probs)}


@lru_cache(maxsize=None)
def outcome_strings(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in np.unravel_index(i, (d,) * n)) for i in range(d**n))


@lru_cache(maxsize=None)
def outcome_digits(n: int, d: int) -> np.ndarray:
    """``(d**n, n)`` array of outcome digits, row-aligned with flat probability arrays."""
    digits = np.stack(np.unravel_index(np.arange(d**n), (d,) * n), axis=1)
    digits.setflags(write=False)
    return digits


@lru_cache(maxsize=4096)
def ghz_probabilities(n: int, d: int, settings: tuple[int, ...], offset_sign: int = MAIN) -> np.ndarray:
    """Cached flat Born distribution of GHZ(n, d) under product ``settings``."""
    p = born_probabilities(ghz(n, d).amplitudes, settings, n, d, offset_sign)
    p.setflags(write=False)
    return p


def draw(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Index drawn from a flat probability vector."""
    cdf = np.cumsum(probs)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(i, len(probs) - 1)


def sample(source: SourceModel, settings: Sequence[int], rng: np.random.Generator) -> tuple[int, ...]:
    """One joint outcome string from a white-noise-mixed GHZ source.

    With probability ``visibility`` the outcome follows the GHZ Born rule,
    otherwise each party's outcome is independently uniform on Z_d (what a
    maximally mixed state gives in any product basis).
    """
    n, d = source.n, source.d
    s = _settings_tuple(settings, n)
    if rng.random() < source.visibility:
        idx = draw(ghz_probabilities(n, d, s), rng)
        return tuple(int(v) for v in outcome_digits(n, d)[idx])
    return tuple(int(v) for v in rng.integers(0, d, size=n))


def product_correlator(
    state: StateVector, settings: Sequence[int], n_power: int, offset_sign: int = MAIN
) -> complex:
    """``<psi| (x) P_{x_k}^n |psi>`` computed by applying the operator powers."""
    s = _settings_tuple(settings, state.n)
    ops = [np.linalg.matrix_power(observable(x, state.d, offset_sign), n_power) for x in s]
    return complex(np.vdot(state.amplitudes, apply_local(state.amplitudes, ops, state.n, state.d)))


def correlator_from_distribution(probs: np.ndarray, n: int, d: int, n_power: int) -> complex:
    """``sum_a omega^{n (a_1 + ... + a_N)} Pr(a)`` from a flat distribution."""
    sums = outcome_digits(n, d).sum(axis=1) % d
    table = np.array([phase(2 * n_power * k, d) for k in range(d)])
    return complex(np.dot(table[sums], probs))
