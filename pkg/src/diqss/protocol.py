"""End-to-end execution of the device-independent secret sharing scheme.

Party 0 is the dealer (Alice); parties ``1..N-1`` are the participants. Each
party keeps its key-round outcomes in its own :class:`Lab`; the only
structure every party can read is the :class:`Transcript`. Participants
recover the secret from their labs plus the transcript and nothing else.

Randomness is counter-based: round ``i`` draws from a stream spawned from the
master seed with key ``(0, i)``, so results do not depend on how rounds are
scheduled across workers.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from . import game
from .adversary import AttackModel
from .hashing import HashFunction, hash_apply, hash_sample

TRANSCRIPT_SCHEMA = "diqss-transcript/1"

_ROUND, _TEST_BITS, _SECRET, _HASH = 0, 1, 2, 3


class ProtocolError(ValueError):
    pass


@lru_cache(maxsize=None)
def oracle_win_prob(n: int, d: int) -> float:
    return game.quantum_win_prob(game.GameSpec(n, d))


@dataclass(frozen=True)
class ProtocolConfig:
    n: int = 3
    d: int = 2
    rounds: int = 200
    mu: float = 0.5
    eta: float = 0.1
    ec_length: int = 10
    p_ref_mode: str = "oracle"
    p_ref_value: float | None = None
    seed: int = 0
    attack: AttackModel = field(default_factory=AttackModel)

    def __post_init__(self):
        if self.n < 3:
            raise ProtocolError(f"need a dealer and at least two participants (N >= 3), got N={self.n}")
        if self.d < 2 or self.d % 2:
            raise ProtocolError(f"d must be even and >= 2, got {self.d}")
        if self.rounds < 1:
            raise ProtocolError("need at least one round")
        if not 0 < self.mu < 1:
            raise ProtocolError(f"mu must lie in (0, 1), got {self.mu}")
        if not 0 < self.eta < 1:
            raise ProtocolError(f"eta must lie in (0, 1), got {self.eta}")
        if self.ec_length < 1:
            raise ProtocolError("hash tag length must be at least 1")
        if self.seed < 0:
            raise ProtocolError("seed must be non-negative")
        if self.p_ref_mode not in ("oracle", "paper", "explicit"):
            raise ProtocolError(f"unknown p_ref mode {self.p_ref_mode!r}")
        if self.p_ref_mode == "explicit" and self.p_ref_value is None:
            raise ProtocolError("explicit p_ref mode needs p_ref_value")
        self.attack.validate(self.n, self.d)

    @property
    def p_ref(self) -> float:
        if self.p_ref_mode == "oracle":
            return oracle_win_prob(self.n, self.d)
        if self.p_ref_mode == "paper":
            return game.paper_win_prob(self.d)
        return float(self.p_ref_value)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["attack"] = self.attack.describe()
        return out


@dataclass
class RoundRecord:
    """Public record of one round.

    Key rounds carry no outcomes here: those stay in the parties' labs, and
    the only key-round value made public is the dealer's masked dit.
    """

    index: int
    test: int
    settings: tuple[int, ...]
    outcomes: tuple[int, ...] | None = None
    win: int | None = None
    masked_secret: int | None = None


@dataclass
class Transcript:
    records: list[RoundRecord] = field(default_factory=list)
    hash_function: HashFunction | None = None
    hash_tag: tuple[int, ...] | None = None

    def key_rounds(self) -> list[int]:
        return [r.index for r in self.records if not r.test]

    def test_records(self) -> list[RoundRecord]:
        return [r for r in self.records if r.test]

    def rows(self) -> list[dict]:
        def fmt(v):
            return "" if v is None else "".join(str(x) for x in v)

        return [
            {
                "i": r.index,
                "T": r.test,
                "settings": fmt(r.settings),
                "outcomes": fmt(r.outcomes),
                "C": "" if r.win is None else r.win,
                "S_prime": "" if r.masked_secret is None else r.masked_secret,
            }
            for r in self.records
        ]

    def to_dict(self) -> dict:
        return {
            "rounds": [
                {
                    "i": r.index,
                    "T": r.test,
                    "settings": list(r.settings),
                    "outcomes": None if r.outcomes is None else list(r.outcomes),
                    "C": r.win,
                    "S_prime": r.masked_secret,
                }
                for r in self.records
            ],
            "hash": None if self.hash_function is None else self.hash_function.to_dict(),
            "hash_tag": None if self.hash_tag is None else list(self.hash_tag),
        }


class Lab:
    """A party's private store of its own key-round outcomes."""

    def __init__(self, party: int, d: int):
        self.party = party
        self.d = d
        self._key: dict[int, int] = {}

    def store(self, index: int, outcome: int) -> None:
        self._key[index] = int(outcome)

    def key_outcome(self, index: int) -> int:
        return self._key[index]

    def __len__(self) -> int:
        return len(self._key)


def share_round(secret_dit: int, dealer_outcome: int, d: int) -> int:
    """Masked dit ``S' = S + S_A (mod d)`` the dealer announces."""
    return (secret_dit + dealer_outcome) % d


def recover_round(masked: int, shares: Sequence[int], d: int) -> int:
    """``S^ = S' + sum_k S_Bk (mod d)``."""
    return (masked + sum(shares)) % d


class Coalition:
    """All participants pooling their labs; sees the transcript and its own labs only."""

    def __init__(self, labs: Sequence[Lab]):
        if any(lab.party == 0 for lab in labs):
            raise ProtocolError("the dealer's lab cannot be part of the coalition")
        self.labs = list(labs)

    def recover(self, transcript: Transcript, d: int) -> list[int]:
        out = []
        for r in transcript.records:
            if r.test:
                continue
            shares = [lab.key_outcome(r.index) for lab in self.labs]
            out.append(recover_round(r.masked_secret, shares, d))
        return out


@dataclass
class ProtocolResult:
    aborted: str
    C: float | None
    p_ref: float
    threshold: float
    test_rounds: int
    key_rounds: int
    dealer_secret: list[int]
    user_secret_length: int
    surplus_dits: int
    recovered_secret: list[int] | None
    hash_verdict: str | None
    key_round_errors: int | None

    def to_dict(self) -> dict:
        return asdict(self)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def test_flags(config: ProtocolConfig) -> np.ndarray:
    """The dealer's public test-round bits ``T_i``."""
    rng = _stream(config.seed, _TEST_BITS)
    return (rng.random(config.rounds) < config.mu).astype(np.int64)


def _measure(job) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    n, d, seed, attack, indices, flags = job
    out = []
    for i, t in zip(indices, flags):
        rng = _stream(seed, _ROUND, int(i))
        if t:
            # dealer's x_i first, then each participant's y_ki
            settings = tuple(int(v) for v in rng.integers(0, 2, size=n))
        else:
            settings = (0,) * n
        out.append((settings, attack.sample(settings, d, rng)))
    return out


def measure_rounds(config: ProtocolConfig, flags: np.ndarray, workers: int = 1):
    indices = np.arange(config.rounds)
    base = (config.n, config.d, config.seed, config.attack)
    if workers <= 1:
        return _measure((*base, indices, flags))
    chunks = np.array_split(indices, workers)
    jobs = [(*base, c, flags[c]) for c in chunks if len(c)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_measure, jobs))
    return [item for part in parts for item in part]


def test_statistic(records: Sequence[RoundRecord]) -> float:
    wins = [r.win for r in records if r.test]
    if not wins:
        raise ProtocolError("no test rounds")
    return sum(wins) / len(wins)


class Session:
    """One execution of the scheme, keeping every party's lab for inspection."""

    def __init__(self, config: ProtocolConfig):
        self.config = config
        self.labs = [Lab(k, config.d) for k in range(config.n)]
        self.transcript = Transcript()
        self.result: ProtocolResult | None = None

    @property
    def dealer(self) -> Lab:
        return self.labs[0]

    @property
    def participants(self) -> list[Lab]:
        return self.labs[1:]

    def execute(self, secret: Sequence[int] | None = None, workers: int = 1) -> ProtocolResult:
        cfg = self.config
        n, d = cfg.n, cfg.d
        flags = test_flags(cfg)
        key_count = int(cfg.rounds - flags.sum())

        user = [] if secret is None else [int(s) for s in secret]
        if any(not 0 <= s < d for s in user):
            raise ProtocolError(f"secret dits must lie in [0, {d - 1}]")
        if len(user) > key_count:
            raise ProtocolError(f"secret has {len(user)} dits but only {key_count} key rounds are available")
        surplus = _stream(cfg.seed, _SECRET).integers(0, d, size=key_count - len(user))
        dealer_string = user + [int(s) for s in surplus]

        # measurement phase
        for i, (t, (settings, outcomes)) in enumerate(zip(flags, measure_rounds(cfg, flags, workers))):
            if t:
                won = int(game.win(settings, outcomes, d))
                self.transcript.records.append(RoundRecord(i, 1, settings, outcomes, won))
            else:
                for lab, a in zip(self.labs, outcomes):
                    lab.store(i, a)
                self.transcript.records.append(RoundRecord(i, 0, settings))

        p_ref = cfg.p_ref
        common = dict(
            p_ref=p_ref,
            threshold=p_ref - cfg.eta,
            test_rounds=int(flags.sum()),
            key_rounds=key_count,
            dealer_secret=dealer_string,
            user_secret_length=len(user),
            surplus_dits=len(surplus),
        )

        # testing
        if flags.sum() == 0:
            self.result = ProtocolResult("test-abort", None, recovered_secret=None, hash_verdict=None,
                                         key_round_errors=None, **common)
            return self.result
        C = test_statistic(self.transcript.records)
        if C < p_ref - cfg.eta:
            self.result = ProtocolResult("test-abort", C, recovered_secret=None, hash_verdict=None,
                                         key_round_errors=None, **common)
            return self.result

        # sharing: dealer masks each key-round secret dit with its own outcome
        key_records = [r for r in self.transcript.records if not r.test]
        for r, s in zip(key_records, dealer_string):
            r.masked_secret = share_round(s, self.dealer.key_outcome(r.index), d)

        # recovery
        recovered = Coalition(self.participants).recover(self.transcript, d)

        # error correction
        h = hash_sample(d, key_count, cfg.ec_length, _stream(cfg.seed, _HASH))
        self.transcript.hash_function = h
        self.transcript.hash_tag = hash_apply(h, dealer_string)
        match = hash_apply(h, recovered) == self.transcript.hash_tag
        errors = sum(a != b for a, b in zip(recovered, dealer_string))
        self.result = ProtocolResult(
            "no" if match else "ec-abort",
            C,
            recovered_secret=recovered if match else None,
            hash_verdict="match" if match else "mismatch",
            key_round_errors=errors,
            **common,
        )
        return self.result


def run(config: ProtocolConfig, secret: Sequence[int] | None = None, workers: int = 1) -> tuple[ProtocolResult, Transcript]:
    session = Session(config)
    result = session.execute(secret, workers)
    return result, session.transcript


def audit_isolation(session: Session) -> None:
    """Raise if any key-round outcome leaked into the public transcript."""
    for r in session.transcript.records:
        if r.test:
            continue
        if r.outcomes is not None or r.win is not None:
            raise AssertionError(f"key round {r.index} exposes outcomes publicly")
        if any(s != 0 for s in r.settings):
            raise AssertionError(f"key round {r.index} used a non-zero setting")
    for lab in session.labs:
        keys = set(lab._key)
        if keys != set(session.transcript.key_rounds()):
            raise AssertionError(f"lab {lab.party} holds outcomes for non-key rounds")


def write_transcript(path: str | Path, config: ProtocolConfig, result: ProtocolResult, transcript: Transcript) -> tuple[Path, Path]:
    """Write ``<path>.csv`` and ``<path>.json``."""
    base = Path(path)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = base.with_suffix(".csv"), base.with_suffix(".json")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["i", "T", "settings", "outcomes", "C", "S_prime"])
        writer.writeheader()
        writer.writerows(transcript.rows())
    payload = {
        "schema": TRANSCRIPT_SCHEMA,
        "config": config.to_dict(),
        "result": result.to_dict(),
        **transcript.to_dict(),
    }
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
    return csv_path, json_path
