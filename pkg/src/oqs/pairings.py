"""Ordered pairings of ``{1, ..., m}`` and the Wick sums built on them.

Indices are 1-based in :class:`Pairing` to match the usual diagram labels;
the vectorised helpers work with 0-based column indices of a time array.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterator

import numpy as np


@dataclass(frozen=True)
class Pairing:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(j), int(k)) for j, k in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        for j, k in pairs:
            if not j < k:
                raise ValueError(f"pair ({j}, {k}) is not ordered")

    @property
    def m(self) -> int:
        return 2 * len(self.pairs)

    def indices(self) -> list[int]:
        return sorted(i for p in self.pairs for i in p)

    def is_valid(self, m: int | None = None) -> bool:
        m = self.m if m is None else m
        return self.indices() == list(range(1, m + 1)) and all(j < k for j, k in self.pairs)


def _check_even(m: int, name: str = "m") -> None:
    if m < 0 or m % 2:
        raise ValueError(f"{name} must be an even non-negative integer, got {m}")


def _pairings_of(labels: tuple[int, ...]) -> Iterator[tuple[tuple[int, int], ...]]:
    if not labels:
        yield ()
        return
    first, rest = labels[0], labels[1:]
    for i, partner in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for tail in _pairings_of(remaining):
            yield ((first, partner),) + tail


def enumerate_pairings(m: int) -> Iterator[Pairing]:
    """Yield every ordered pairing of ``{1, ..., m}`` once.

    The smallest unpaired index is matched with each larger unpaired index in
    turn, recursing on the rest. Nothing is materialised, so ``m = 14`` runs
    in constant memory.
    """
    _check_even(m)
    for pairs in _pairings_of(tuple(range(1, m + 1))):
        yield Pairing(pairs)


def pairing_count(m: int) -> int:
    """``(m - 1)!!`` with ``(-1)!! = 1``."""
    _check_even(m)
    out = 1
    for k in range(m - 1, 0, -2):
        out *= k
    return out


def wick_product(q: Pairing, s, corr: Callable) -> complex:
    """``prod_{(j, k) in q} B(s_j, s_k)``; the empty pairing gives 1."""
    times = getattr(s, "times", s)
    out = 1.0 + 0.0j
    for j, k in q.pairs:
        out *= complex(corr(times[j - 1], times[k - 1]))
    return out


def wick_sum(s, corr: Callable) -> complex:
    """Sum of :func:`wick_product` over all ordered pairings; zero for odd ``m``."""
    times = getattr(s, "times", s)
    m = len(times)
    if m % 2:
        return 0.0 + 0.0j
    return complex(sum(wick_product(q, times, corr) for q in enumerate_pairings(m)))


def correlation_table(times, corr: Callable) -> np.ndarray:
    """``table[n, j, k] = B(s_j, s_k)`` for ``j < k`` (zero elsewhere), rows of ``times``."""
    times = np.asarray(times, dtype=float)
    n, m = times.shape
    table = np.zeros((n, m, m), dtype=complex)
    j, k = np.triu_indices(m, 1)
    if j.size:
        table[:, j, k] = corr(times[:, j], times[:, k])
    return table


def hafnian_batch(table: np.ndarray) -> np.ndarray:
    """Batched sum over ordered pairings of upper-triangular ``table`` entries.

    Expands on the smallest remaining index with memoisation over the
    remaining index set, so cost grows like ``m^2 2^m`` rather than ``(m-1)!!``.
    """
    n, m, _ = table.shape
    if m % 2:
        return np.zeros(n, dtype=complex)
    memo: dict[int, np.ndarray] = {0: np.ones(n, dtype=complex)}

    def solve(mask: int) -> np.ndarray:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        first = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << first)
        acc = np.zeros(n, dtype=complex)
        k = rest
        while k:
            bit = k & -k
            partner = bit.bit_length() - 1
            acc += table[:, first, partner] * solve(rest & ~bit)
            k &= ~bit
        memo[mask] = acc
        return acc

    return solve((1 << m) - 1)


def wick_sum_batch(times, corr: Callable) -> np.ndarray:
    """Vectorised :func:`wick_sum` over rows of ``times`` (shape ``(N, m)``)."""
    times = np.asarray(times, dtype=float)
    return hafnian_batch(correlation_table(times, corr))


def split_pairings(m: int, subset_size: int) -> Iterator[tuple[tuple[int, ...], Pairing, Pairing]]:
    """Yield ``(c, q_delta, q_base)`` for every subset ``c`` of size ``subset_size``.

    ``q_delta`` pairs the indices in ``c``, ``q_base`` pairs the complement.
    Summing ``L_B(q_base) L_dB(q_delta)`` over all triples and all even
    subset sizes reproduces the Wick sum of ``B + dB``.
    """
    _check_even(m)
    _check_even(subset_size, "subset_size")
    if subset_size > m:
        raise ValueError(f"subset_size {subset_size} exceeds m {m}")
    for c in combinations(range(1, m + 1), subset_size):
        rest = tuple(i for i in range(1, m + 1) if i not in c)
        for q_delta in _pairings_of(c):
            for q_base in _pairings_of(rest):
                yield c, Pairing(q_delta), Pairing(q_base)


@lru_cache(maxsize=None)
def pairing_index_array(m: int) -> np.ndarray:
    """All pairings of ``m`` as a 0-based ``(count, m/2, 2)`` array."""
    _check_even(m)
    arr = [[(j - 1, k - 1) for j, k in q.pairs] for q in enumerate_pairings(m)]
    return np.array(arr, dtype=int).reshape(pairing_count(m), m // 2, 2)
