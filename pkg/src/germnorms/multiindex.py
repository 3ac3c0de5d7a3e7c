"""Combinatorics of d-dimensional multi-indices grouped by total order.

A multi-index is a plain tuple of nonnegative ints (a_1, ..., a_d).  The
"shell" of order n is the set of all multi-indices whose entries sum to n;
shells are always enumerated completely and in lexicographic order, which is
the fixed layout used by every serialized element in this package.
"""

from __future__ import annotations

import math
from collections.abc import Sequence


def order(alpha: Sequence[int]) -> int:
    """Total order |alpha|, the sum of the entries."""
    return sum(alpha)


def shell(dim: int, n: int) -> list[tuple[int, ...]]:
    """Enumerate every multi-index with ``dim`` entries summing to ``n``.

    The result is lexicographically sorted and has exactly
    ``shell_count(dim, n)`` entries.
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    if n < 0:
        raise ValueError(f"shell order must be >= 0, got {n}")
    if dim == 1:
        return [(n,)]
    out: list[tuple[int, ...]] = []
    for head in range(n + 1):
        for tail in shell(dim - 1, n - head):
            out.append((head,) + tail)
    return out


def shell_count(dim: int, n: int) -> int:
    """Number of multi-indices of order ``n`` in dimension ``dim``.

    Exact integer arithmetic (Python ints do not overflow); equals the
    binomial coefficient C(n + dim - 1, dim - 1).
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    if n < 0:
        raise ValueError(f"shell order must be >= 0, got {n}")
    return math.comb(n + dim - 1, dim - 1)


def log_factorial(alpha: Sequence[int]) -> float:
    """Natural log of the product of the entry factorials.

    Exactly 0.0 for the zero index; computed through lgamma so large
    entries never overflow.
    """
    total = 0.0
    for a in alpha:
        if a < 0:
            raise ValueError(f"multi-index entries must be >= 0, got {tuple(alpha)}")
        total += math.lgamma(a + 1)
    return total
