"""Source and device corruption models.

Every model acts identically and independently on each round. Descriptor
grammar used by the CLI::

    none
    noise:v=0.8
    intercept:targets=1        (1-based party numbers, comma separated)
    classical:best             (or classical:m01,m02,...  one digit per party/setting)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from . import quantum
from .bell import LhvAssignment
from .ditmath import all_inputs
from .game import GameSpec, classical_win_maximize, win_table

KINDS = ("none", "white_noise", "intercept_resend", "deterministic_devices")


class InvalidAttack(ValueError):
    pass


@dataclass(frozen=True)
class AttackModel:
    kind: str = "none"
    visibility: float = 1.0
    targets: tuple[int, ...] = ()
    strategy: LhvAssignment | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidAttack(f"unknown attack kind {self.kind!r}")
        if not 0.0 <= self.visibility <= 1.0:
            raise InvalidAttack(f"visibility must lie in [0, 1], got {self.visibility}")

    @classmethod
    def none(cls) -> "AttackModel":
        return cls()

    @classmethod
    def white_noise(cls, v: float) -> "AttackModel":
        return cls("white_noise", visibility=float(v))

    @classmethod
    def intercept_resend(cls, targets: Sequence[int]) -> "AttackModel":
        return cls("intercept_resend", targets=tuple(sorted(set(int(t) for t in targets))))

    @classmethod
    def deterministic_devices(cls, strategy: LhvAssignment) -> "AttackModel":
        return cls("deterministic_devices", strategy=strategy)

    def validate(self, n: int, d: int) -> None:
        if self.kind == "intercept_resend":
            if not self.targets:
                raise InvalidAttack("intercept-resend needs at least one target")
            if any(not 0 <= t < n for t in self.targets):
                raise InvalidAttack(f"targets {self.targets} outside parties 0..{n - 1}")
        if self.kind == "deterministic_devices":
            if self.strategy is None or self.strategy.n != n or self.strategy.d != d:
                raise InvalidAttack(f"device strategy does not match N={n}, d={d}")

    def describe(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "white_noise":
            return f"noise:v={self.visibility:g}"
        if self.kind == "intercept_resend":
            return "intercept:targets=" + ",".join(str(t + 1) for t in self.targets)
        return "classical:" + ",".join(str(v) for pair in self.strategy.values for v in pair)

    def sample(self, settings: Sequence[int], d: int, rng: np.random.Generator) -> tuple[int, ...]:
        n = len(settings)
        if self.kind == "none":
            return quantum.sample(quantum.SourceModel(n, d, 1.0), settings, rng)
        if self.kind == "white_noise":
            return quantum.sample(quantum.SourceModel(n, d, self.visibility), settings, rng)
        if self.kind == "deterministic_devices":
            return self.strategy.respond(settings)
        idx = quantum.draw(corrupted_probs(self, tuple(settings), d), rng)
        return tuple(int(v) for v in quantum.outcome_digits(n, d)[idx])


def parse_attack(descriptor: str, n: int, d: int) -> AttackModel:
    head, _, rest = descriptor.strip().partition(":")
    params = {}
    if head in ("noise", "intercept") and rest:
        key, _, value = rest.partition("=")
        params[key.strip()] = value.strip()
    if head == "none" and not rest:
        model = AttackModel.none()
    elif head == "noise" and "v" in params:
        model = AttackModel.white_noise(float(params["v"]))
    elif head == "intercept" and "targets" in params:
        model = AttackModel.intercept_resend([int(t) - 1 for t in params["targets"].split(",")])
    elif head == "classical" and rest == "best":
        model = AttackModel.deterministic_devices(classical_win_maximize(GameSpec(n, d))[1])
    elif head == "classical" and rest:
        digits = [int(v) for v in rest.split(",")]
        if len(digits) != 2 * n:
            raise InvalidAttack(f"classical strategy needs {2 * n} digits, got {len(digits)}")
        pairs = tuple((digits[2 * j], digits[2 * j + 1]) for j in range(n))
        try:
            model = AttackModel.deterministic_devices(LhvAssignment(pairs, d))
        except ValueError as exc:
            raise InvalidAttack(str(exc)) from None
    else:
        raise InvalidAttack(f"cannot parse attack descriptor {descriptor!r}")
    model.validate(n, d)
    return model


@lru_cache(maxsize=4096)
def corrupted_probs(model: AttackModel, settings: tuple[int, ...], d: int) -> np.ndarray:
    """Flat outcome distribution of the corrupted source/devices for one setting string."""
    n = len(settings)
    model.validate(n, d)
    if model.kind == "none":
        p = quantum.ghz_probabilities(n, d, settings).copy()
    elif model.kind == "white_noise":
        v = model.visibility
        p = v * quantum.ghz_probabilities(n, d, settings) + (1 - v) / d**n
    elif model.kind == "deterministic_devices":
        p = np.zeros(d**n)
        p[np.ravel_multi_index(model.strategy.respond(settings), (d,) * n)] = 1.0
    else:
        # Eve measures each target in the computational basis and forwards the
        # collapsed state; sum the Born distributions of every branch
        amps = quantum.ghz(n, d).amplitudes
        digits = quantum.outcome_digits(n, d)
        cols = list(model.targets)
        p = np.zeros(d**n)
        for z in product(range(d), repeat=len(cols)):
            branch = np.where(np.all(digits[:, cols] == z, axis=1), amps, 0)
            p += quantum.born_probabilities(branch, settings, n, d)
    p.setflags(write=False)
    return p


def corrupted_distribution(model: AttackModel, settings: Sequence[int], d: int) -> dict[tuple[int, ...], float]:
    s = tuple(int(x) for x in settings)
    probs = corrupted_probs(model, s, d)
    return {a: float(pr) for a, pr in zip(quantum.outcome_strings(len(s), d), probs)}


def predicted_C(model: AttackModel, n: int, d: int) -> float:
    """Exact expected game win rate under the model with uniform settings."""
    wins = win_table(n, d)
    total = 0.0
    for i, settings in enumerate(all_inputs(n)):
        total += float(corrupted_probs(model, settings, d) @ wins[i])
    return total / 2**n
