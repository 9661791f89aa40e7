"""Slow, obviously-correct reference computations used as test oracles.

Nothing here imports the package: phases come from cmath directly, states
are built with Kronecker products and probabilities by explicit inner
products, and searches are plain itertools loops.
"""

import cmath
import itertools
import math

import numpy as np


def omega(d, power):
    return cmath.exp(2j * math.pi * power / d)


def basis_vector(setting, alpha, d, c=1):
    """Components omega^{-(alpha - c*setting/2) beta}; c=1 main text, c=-1 appendix form."""
    return np.array([omega(d, -(alpha - c * setting / 2) * beta) for beta in range(d)]) / math.sqrt(d)


def ghz_vector(n, d):
    v = np.zeros(d**n, dtype=complex)
    for a in range(d):
        idx = sum(a * d**k for k in range(n))
        v[idx] = 1 / math.sqrt(d)
    return v


def born(state, settings, outcome, d, c=1):
    vec = np.array([1.0 + 0j])
    for x, a in zip(settings, outcome):
        vec = np.kron(vec, basis_vector(x, a, d, c))
    return abs(np.vdot(vec, state)) ** 2


def distribution(state, settings, d, c=1):
    n = len(settings)
    return {a: born(state, settings, a, d, c) for a in itertools.product(range(d), repeat=n)}


def f_target(bits, d):
    w = sum(bits)
    return None if w % 2 else (w // 2) % d


def wins(bits, answers, d):
    j = f_target(bits, d)
    return j is not None and sum(answers) % d == j


def quantum_win_probability(n, d):
    state = ghz_vector(n, d)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        for a, p in distribution(state, bits, d).items():
            if wins(bits, a, d):
                total += p
    return total / 2**n


def strategies(n, d):
    for flat in itertools.product(range(d), repeat=2 * n):
        yield tuple((flat[2 * j], flat[2 * j + 1]) for j in range(n))


def strategy_win_probability(strategy, n, d):
    total = 0
    for bits in itertools.product((0, 1), repeat=n):
        total += wins(bits, [strategy[j][x] for j, x in enumerate(bits)], d)
    return total / 2**n


def best_classical(n, d):
    return max(strategy_win_probability(s, n, d) for s in strategies(n, d))


def bell_of_values(values, n, d, sign=-1):
    """Literal product-plus-conjugate Bell functional for a deterministic model."""
    total = 0j
    for p in range(1, d):
        prod = 1 + 0j
        for j in range(n):
            prod *= omega(d, p * values[j][0]) + omega(d, sign * p / 2) * omega(d, p * values[j][1])
        total += prod
    total /= 2**n
    return (total + total.conjugate()).real


def lhv_max(n, d, sign=-1):
    return max(bell_of_values(s, n, d, sign) for s in strategies(n, d))


def binomial_sigma(p, trials):
    return math.sqrt(p * (1 - p) / trials)
