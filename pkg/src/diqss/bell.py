"""The generic multipartite d-dimensional Bell functional.

Two sign conventions are supported:

``"main"``
    ``prod_j (P0^n + omega^{-n/2} P1^n)`` with setting-1 eigenvectors built
    from ``alpha - 1/2``. This is the form the game and protocol use.
``"appendixA"``
    ``prod_j (A^n + omega^{+n/2} B^n)`` with setting-1 eigenvectors built from
    ``alpha + 1/2``.

Expanding either product and adding the complex conjugate cancels every
odd-weight term, which leaves the "rewritten" sum over even-weight inputs that
:func:`bell_value` evaluates. :func:`bell_value_expanded` keeps the literal
product-plus-conjugate form and serves as an independent check.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import quantum
from .ditmath import all_inputs, f_exponent, phase

CONVENTIONS = ("main", "appendixA")
SEARCH_CAP = 10**7
_CHUNK = 1 << 16

Correlator = Callable[[tuple[int, ...], int], complex]


class SearchCapExceeded(ValueError):
    pass


def _sigma(convention: str) -> int:
    # sign of the half-power attached to the setting-1 variable
    try:
        return {"main": -1, "appendixA": 1}[convention]
    except KeyError:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}") from None


def offset_sign(convention: str) -> int:
    _sigma(convention)
    return quantum.MAIN if convention == "main" else quantum.APPENDIX_A


def target_exponent(bits, d: int, convention: str = "main") -> int | None:
    """Dit ``j`` with term phase ``omega^{-n j}``; ``None`` for odd weight.

    For the main convention this is exactly the game function ``f``.
    """
    if convention == "main":
        return f_exponent(bits, d)
    w = sum(bits)
    return None if w % 2 else (-(w // 2)) % d


@dataclass(frozen=True)
class LhvAssignment:
    """Deterministic local model: party ``j`` answers ``omega^{values[j][x]}``."""

    values: tuple[tuple[int, int], ...]
    d: int

    def __post_init__(self):
        vals = tuple((int(a), int(b)) for a, b in self.values)
        object.__setattr__(self, "values", vals)
        if any(not (0 <= v < self.d) for pair in vals for v in pair):
            raise ValueError(f"assignment entries must lie in [0, {self.d - 1}]")

    @property
    def n(self) -> int:
        return len(self.values)

    def __call__(self, party: int, setting: int) -> int:
        return self.values[party][setting]

    @classmethod
    def from_index(cls, index: int, n: int, d: int) -> "LhvAssignment":
        digits = np.unravel_index(index, (d,) * (2 * n))
        flat = [int(v) for v in digits]
        return cls(tuple((flat[2 * j], flat[2 * j + 1]) for j in range(n)), d)

    def index(self) -> int:
        flat = [v for pair in self.values for v in pair]
        return int(np.ravel_multi_index(flat, (self.d,) * (2 * self.n)))

    def respond(self, bits) -> tuple[int, ...]:
        return tuple(self.values[j][x] for j, x in enumerate(bits))


def bell_value(correlator: Correlator, n: int, d: int, convention: str = "main") -> complex:
    """Rewritten form ``2^{-(N-1)} sum_n sum_x omega^{-n f(x)} <prod P^n>``."""
    total = 0j
    for bits in all_inputs(n):
        j = target_exponent(bits, d, convention)
        if j is None:
            continue
        for p in range(1, d):
            total += phase(-2 * p * j, d) * correlator(bits, p)
    return total / 2 ** (n - 1)


def bell_value_expanded(correlator: Correlator, n: int, d: int, convention: str = "main") -> complex:
    """Literal ``2^{-N} sum_n <prod_j (P0^n + omega^{s n/2} P1^n)> + c.c.``."""
    sigma = _sigma(convention)
    total = 0j
    for bits in all_inputs(n):
        w = sum(bits)
        for p in range(1, d):
            total += phase(sigma * p * w, d) * correlator(bits, p)
    total /= 2**n
    return total + total.conjugate()


def _quantum_correlator(n: int, d: int, convention: str, basis_convention: str | None = None) -> Correlator:
    state = quantum.ghz(n, d)
    sign = offset_sign(basis_convention or convention)
    return lambda bits, p: quantum.product_correlator(state, bits, p, sign)


def _real(value: complex, tol: float = 1e-9) -> float:
    if abs(value.imag) > tol:
        raise ArithmeticError(f"Bell value has imaginary residue {value.imag:.3e}")
    return float(value.real)


def bell_quantum_value(n: int, d: int, convention: str = "main", cap: int = quantum.DEFAULT_CAP) -> float:
    if n < 2 or d < 2:
        raise ValueError("need N >= 2 and d >= 2")
    quantum.check_cap(n, d, cap)
    return _real(bell_value(_quantum_correlator(n, d, convention), n, d, convention))


def mismatched_quantum_value(n: int, d: int, convention: str = "main") -> float:
    """Bell value of GHZ when the *other* convention's setting-1 basis is used."""
    other = "appendixA" if convention == "main" else "main"
    return _real(bell_value(_quantum_correlator(n, d, convention, other), n, d, convention))


def classical_bound(n: int, d: int) -> float:
    if d % 2 == 0 and n % 2 == 0:
        return d * (2 ** (-n / 2) + 0.5) - 1
    if d % 2 == 0:
        return d * (2 ** (-(n + 1) / 2) + 0.5) - 1
    return float(d - 1)


def bell_of_assignment(assignment: LhvAssignment, n: int, d: int, convention: str = "main") -> float:
    if assignment.n != n or assignment.d != d:
        raise ValueError(f"assignment shape ({assignment.n}, {assignment.d}) does not match ({n}, {d})")
    # histogram of half-step exponents; floats only in the final dot product
    counts = np.zeros(2 * d, dtype=np.int64)
    for bits in all_inputs(n):
        j = target_exponent(bits, d, convention)
        if j is None:
            continue
        k = sum(assignment.respond(bits)) - j
        for p in range(1, d):
            counts[(2 * p * k) % (2 * d)] += 1
    phases = np.array([phase(t, d) for t in range(2 * d)])
    return _real(complex(np.dot(counts, phases)) / 2 ** (n - 1))


def _selection(n: int, d: int, convention: str) -> tuple[np.ndarray, np.ndarray]:
    valid = [(bits, target_exponent(bits, d, convention)) for bits in all_inputs(n)]
    valid = [(bits, j) for bits, j in valid if j is not None]
    sel = np.zeros((2 * n, len(valid)), dtype=np.int64)
    for col, (bits, _) in enumerate(valid):
        for party, x in enumerate(bits):
            sel[2 * party + x, col] = 1
    targets = np.array([j for _, j in valid], dtype=np.int64)
    return sel, targets


def _class_table(d: int) -> np.ndarray:
    # sum_{n=1}^{d-1} omega^{n k}, per residue class k
    return np.array([sum(phase(2 * p * k, d) for p in range(1, d)).real for k in range(d)])


def _search_range(args) -> tuple[float, int]:
    n, d, convention, start, stop = args
    sel, targets = _selection(n, d, convention)
    table = _class_table(d)
    radix = d ** np.arange(2 * n - 1, -1, -1, dtype=np.int64)
    best_val, best_idx = -np.inf, -1
    for lo in range(start, stop, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, stop), dtype=np.int64)
        digits = (idx[:, None] // radix) % d
        k = (digits @ sel - targets) % d
        counts = np.stack([(k == c).sum(axis=1) for c in range(d)], axis=1)
        values = counts @ table / 2 ** (n - 1)
        i = int(np.argmax(values))
        if values[i] > best_val:
            best_val, best_idx = float(values[i]), int(idx[i])
    return best_val, best_idx


def exhaustive_max(n: int, d: int, convention: str = "main", workers: int = 1) -> tuple[float, int]:
    """Maximum of the Bell value over all ``d**(2N)`` assignments, with its mixed-radix index."""
    _sigma(convention)
    size = d ** (2 * n)
    if size > SEARCH_CAP:
        raise SearchCapExceeded(f"d**(2N) = {size} assignments exceeds search cap {SEARCH_CAP}")
    if workers <= 1 or size <= _CHUNK:
        return _search_range((n, d, convention, 0, size))
    bounds = np.linspace(0, size, workers + 1).astype(int)
    jobs = [(n, d, convention, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_search_range, jobs))
    # ranges are ordered, so a strict > keeps the lowest index among ties
    best = results[0]
    for r in results[1:]:
        if r[0] > best[0]:
            best = r
    return best


def lhv_maximize(n: int, d: int, convention: str = "main", workers: int = 1) -> tuple[float, LhvAssignment]:
    value, index = exhaustive_max(n, d, convention, workers)
    return value, LhvAssignment.from_index(index, n, d)


@dataclass
class BellReport:
    n: int
    d: int
    convention: str
    quantum_value: float
    classical_bound_formula: float
    lhv_max: float
    maximizing_assignment: list[list[int]]
    mismatched_basis_value: float
    bound_respected: bool = field(init=False)
    bound_tight: bool = field(init=False)
    violation: bool = field(init=False)

    def __post_init__(self):
        self.bound_respected = self.lhv_max <= self.classical_bound_formula + 1e-9
        self.bound_tight = abs(self.lhv_max - self.classical_bound_formula) <= 1e-9
        self.violation = self.quantum_value > self.lhv_max + 1e-9

    def to_dict(self) -> dict:
        return asdict(self)


def bell_report(n: int, d: int, convention: str = "main", workers: int = 1) -> BellReport:
    lhv, assignment = lhv_maximize(n, d, convention, workers)
    return BellReport(
        n=n,
        d=d,
        convention=convention,
        quantum_value=bell_quantum_value(n, d, convention),
        classical_bound_formula=classical_bound(n, d),
        lhv_max=lhv,
        maximizing_assignment=[list(pair) for pair in assignment.values],
        mismatched_basis_value=mismatched_quantum_value(n, d, convention),
    )
