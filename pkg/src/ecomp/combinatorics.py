"""Integer combinatorics used by the analytic machinery.

Everything here is exact: Stirling numbers and factorials are Python ints, and
the Bell-polynomial coefficient arithmetic only crosses into float when the
caller's arguments do.
"""

from __future__ import annotations

import math
from functools import lru_cache

from .errors import UnsupportedOrderError

# Hard caps.  Orders beyond these are outside the supported envelope; the
# factorial cap keeps coefficient magnitudes exactly representable paths short.
MAX_BELL_ORDER = 10
MAX_STIRLING = 20


@lru_cache(maxsize=None)
def factorial(n: int) -> int:
    if n < 0:
        raise UnsupportedOrderError(f"factorial of negative order {n}")
    return math.factorial(n)


@lru_cache(maxsize=None)
def stirling2(s: int, j: int) -> int:
    """Stirling number of the second kind {s over j}, exact integer.

    Recurrence {s,j} = j*{s-1,j} + {s-1,j-1}; {0,0} = 1 and {s,0} = 0 for s>0.
    """
    if s < 0 or j < 0 or s > MAX_STIRLING or j > MAX_STIRLING:
        raise UnsupportedOrderError(f"stirling2({s},{j}) outside table cap {MAX_STIRLING}")
    if s == 0 and j == 0:
        return 1
    if s == 0 or j == 0:
        return 0
    if j > s:
        return 0
    return j * stirling2(s - 1, j) + stirling2(s - 1, j - 1)


@lru_cache(maxsize=None)
def _compositions(h: int, k: int, m: int) -> tuple[tuple[int, ...], ...]:
    """All (j_1..j_m) with j_i >= 0, sum j_i = k and sum i*j_i = h."""
    out: list[tuple[int, ...]] = []

    def rec(i: int, remk: int, remh: int, cur: list[int]) -> None:
        if i == m:
            if remk == 0 and remh == 0:
                out.append(tuple(cur))
            return
        # weight of slot i+1 is (i+1); prune on both constraints
        top = min(remk, remh // (i + 1))
        for j in range(top, -1, -1):
            cur.append(j)
            rec(i + 1, remk - j, remh - (i + 1) * j, cur)
            cur.pop()

    rec(0, k, h, [])
    return tuple(out)


def partial_bell(n: int, k: int, xs) -> float:
    """Partial (incomplete) Bell polynomial B_{n,k}(x_1, ..., x_{n-k+1}).

    B_{n,k} = sum over partitions of n into k parts of
    n!/(prod j_i!) * prod (x_i/i!)^{j_i}.  Used for Faa di Bruno composition.
    """
    if n == 0 and k == 0:
        return 1.0
    if n <= 0 or k <= 0 or k > n:
        return 0.0
    m = n - k + 1
    if len(xs) < m:
        raise UnsupportedOrderError(f"partial_bell({n},{k}) needs {m} arguments, got {len(xs)}")
    total = 0.0
    for js in _compositions(n, k, m):
        coef = float(factorial(n))
        term = 1.0
        for i, j in enumerate(js, start=1):
            if j == 0:
                continue
            coef /= factorial(j) * factorial(i) ** j
            term *= xs[i - 1] ** j
        total += coef * term
    return total


def weighted_bell(h: int, k: int, xs) -> float:
    """Weighted exponential Bell polynomial with 1/binom(h, j_1) weights.

    C_{h,k}(x_1, ..., x_{h-k+1}) = sum over {sum j_i = k, sum i*j_i = h} of
    binom(h, j_1)^{-1} * h!/(prod j_i!) * prod (x_i/i!)^{j_i}.

    C_{0,0} = 1 by convention (empty partition).
    """
    if h == 0 and k == 0:
        return 1.0
    if h < 0 or k < 0 or k > h:
        return 0.0
    if h > 2 * MAX_BELL_ORDER:
        raise UnsupportedOrderError(f"weighted_bell order {h} above cap {2 * MAX_BELL_ORDER}")
    m = h - k + 1
    if len(xs) < m:
        raise UnsupportedOrderError(f"weighted_bell({h},{k}) needs {m} arguments, got {len(xs)}")
    total = 0.0
    for js in _compositions(h, k, m):
        j1 = js[0]
        coef = float(factorial(h)) / math.comb(h, j1)
        term = 1.0
        for i, j in enumerate(js, start=1):
            if j == 0:
                continue
            coef /= factorial(j) * factorial(i) ** j
            term *= xs[i - 1] ** j
        total += coef * term
    return total


def compose_derivatives(outer_at, inner: list[float], n: int) -> list[float]:
    """Derivatives of outer(inner(x)) up to order n via Faa di Bruno.

    ``inner`` holds [g(x), g'(x), ..., g^(n)(x)]; ``outer_at(k)`` returns the
    k-th derivative of the outer function evaluated at g(x) (k=0 allowed).
    Returns [f(x), f'(x), ..., f^(n)(x)].
    """
    out = [outer_at(0)]
    gs = inner[1:]
    for order in range(1, n + 1):
        acc = 0.0
        for k in range(1, order + 1):
            acc += outer_at(k) * partial_bell(order, k, gs)
        out.append(acc)
    return out
