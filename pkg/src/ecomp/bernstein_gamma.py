"""Real-argument extension of running products of a rate function.

For a rate function phi the integer product W(n) = phi(1) * ... * phi(n-1)
(W(1) = 1) extends to real arguments through the limit

    W(x) = lim_n  phi(1)...phi(n) * phi(n)^x / (phi(x) phi(x+1) ... phi(x+n)),

the direct analogue of Euler's limit formula for the gamma function (phi = id
recovers Gamma exactly).  The finite-n value converges like 1/n, so the
evaluator accelerates a geometric schedule n = 2^6 .. 2^14 with Richardson
extrapolation on the log scale and checks the last two extrapolants against
``tol_limit``.

The log of the defining quotient is accumulated as paired differences
log phi(k) - log phi(x+k); the pairs decay like x/k, which keeps the float
rounding of the cumulative sum orders of magnitude below the extrapolation
target (the naive two-sum form loses ~1e-7 to cancellation at n = 2^14).
"""

from __future__ import annotations

import math
import threading
import warnings

import numpy as np

from .errors import ConvergenceError, DomainError, PreconditionError
from .phi import PhiFunction, check_eventual_log_convexity

DEFAULT_TOL_LIMIT = 1e-6
_SCHEDULE_POWS = (6, 14)      # n = 2^6 .. 2^14, ratio-2 nodes for extrapolation
_COND_WEBSTER_TOL = 1e-2      # |phi(n)/phi(n+1) - 1| at the schedule tail


class BernsteinGammaEvaluator:
    """Caches integer products and real-argument limit values for one phi."""

    def __init__(self, phi: PhiFunction, tol_limit: float = DEFAULT_TOL_LIMIT,
                 check_preconditions: bool = True):
        if not math.isinf(phi.domain_sup):
            raise PreconditionError(
                f"{phi.spec_id}: the limit formula needs phi on all of (0, inf)"
            )
        self.phi = phi
        self.tol_limit = float(tol_limit)
        self._ns = [2 ** j for j in range(_SCHEDULE_POWS[0], _SCHEDULE_POWS[1] + 1)]
        self._nmax = self._ns[-1]
        self._lock = threading.Lock()
        self._int_logs: np.ndarray | None = None   # log phi(k), k = 1.._nmax
        self._int_cum: np.ndarray | None = None    # cumulative sums, [0] = 0
        self._real_cache: dict[float, float] = {}

        if check_preconditions:
            self._check_tail_condition()
            self._check_log_convexity()

    # -- preconditions ------------------------------------------------------

    def _check_tail_condition(self):
        n = float(self._nmax)
        ratio = math.exp(self.phi.log_eval(n) - self.phi.log_eval(n + 1.0))
        if abs(ratio - 1.0) > _COND_WEBSTER_TOL:
            raise PreconditionError(
                f"{self.phi.spec_id}: phi(n)/phi(n+1) = {ratio:.6g} at n = {n:.0f}; "
                "the limit formula requires this ratio to approach 1"
            )

    def _check_log_convexity(self):
        # uniqueness-style precondition; convergence itself does not need it,
        # so a failure only warns (bounded kinds such as ratio are log-concave
        # yet the limit demonstrably converges to the right interpolant)
        try:
            grid = np.array([8.0, 16.0, 32.0, 64.0, 128.0])
            rep = check_eventual_log_convexity(self.phi, 4.0, grid)
        except Exception:
            return
        if rep.classification != "log-convex":
            warnings.warn(
                f"{self.phi.spec_id}: not eventually log-convex on the check grid; "
                "real-argument products are still computed from the limit formula",
                RuntimeWarning,
                stacklevel=3,
            )

    # -- integer products ---------------------------------------------------

    def _integer_cum(self) -> np.ndarray:
        with self._lock:
            if self._int_cum is None:
                ks = np.arange(1, self._nmax + 1, dtype=float)
                self._int_logs = self.phi.log_eval(ks)
                self._int_cum = np.concatenate([[0.0], np.cumsum(self._int_logs)])
            return self._int_cum

    def log_w_integer(self, n: int) -> float:
        """log W(n) = sum_{k=1}^{n-1} log phi(k); W(1) = 1."""
        if n < 1 or int(n) != n:
            raise DomainError(f"integer product needs integer n >= 1, got {n}")
        n = int(n)
        if n - 1 <= self._nmax:
            return float(self._integer_cum()[n - 1])
        extra = np.arange(self._nmax + 1, n, dtype=float)
        return float(self._integer_cum()[self._nmax] + self.phi.log_eval(extra).sum())

    def w_integer(self, n: int) -> float:
        return math.exp(self.log_w_integer(n))

    # -- real extension ------------------------------------------------------

    def _limit_checkpoints(self, x: float) -> np.ndarray:
        cum = self._integer_cum()
        ks = np.arange(1.0, self._nmax + 1.0)
        diff = self._int_logs - self.phi.log_eval(ks + x)
        dcum = np.cumsum(diff)
        lphix = self.phi.log_eval(x)
        return np.array([
            dcum[n - 1] - lphix + x * self._int_logs[n - 1] for n in self._ns
        ])

    def log_w_real(self, x: float) -> float:
        """log W(x) for real x > 0 via the extrapolated limit formula."""
        x = float(x)
        if not x > 0.0 or not math.isfinite(x):
            raise DomainError(f"real product needs finite x > 0, got {x}")
        with self._lock:
            hit = self._real_cache.get(x)
        if hit is not None:
            return hit
        L = self._limit_checkpoints(x)
        # Neville scheme in h = 1/n with node ratio 2
        m = len(L)
        prev = L
        for j in range(1, m):
            cur = np.empty(m - j)
            fac = 2.0 ** j - 1.0
            for i in range(m - j):
                cur[i] = prev[i + 1] + (prev[i + 1] - prev[i]) / fac
            last_pair = (prev[-1], cur[-1])
            prev = cur
        if abs(last_pair[1] - last_pair[0]) > self.tol_limit:
            raise ConvergenceError(
                f"{self.phi.spec_id}: limit extrapolants for x = {x} differ by "
                f"{abs(last_pair[1] - last_pair[0]):.3g} > {self.tol_limit}"
            )
        val = float(prev[0])
        with self._lock:
            self._real_cache[x] = val
        return val

    def w_real(self, x: float) -> float:
        return math.exp(self.log_w_real(x))

    # -- logarithmic derivatives ---------------------------------------------

    def psi(self, y: float, step: float | None = None) -> float:
        """d/dy log W(y) by central difference (classical digamma for phi = id)."""
        y = float(y)
        h = step if step is not None else 1e-4 * max(1.0, abs(y))
        if y - h <= 0.0:
            raise DomainError(f"psi needs y - step > 0, got y = {y}, step = {h}")
        return (self.log_w_real(y + h) - self.log_w_real(y - h)) / (2.0 * h)

    def psi_prime(self, y: float, step: float | None = None) -> float:
        """Second log-derivative of W by central second difference."""
        y = float(y)
        h = step if step is not None else 1e-3 * max(1.0, abs(y))
        if y - h <= 0.0:
            raise DomainError(f"psi_prime needs y - step > 0, got y = {y}, step = {h}")
        f0 = self.log_w_real(y)
        return (self.log_w_real(y + h) - 2.0 * f0 + self.log_w_real(y - h)) / (h * h)


_evaluators: dict[str, BernsteinGammaEvaluator] = {}
_evaluators_lock = threading.Lock()


def get_evaluator(phi: PhiFunction, tol_limit: float = DEFAULT_TOL_LIMIT) -> BernsteinGammaEvaluator:
    """Shared per-phi evaluator (caches survive across distributions)."""
    key = f"{phi.spec_id}@{tol_limit!r}"
    with _evaluators_lock:
        ev = _evaluators.get(key)
        if ev is None:
            ev = BernsteinGammaEvaluator(phi, tol_limit=tol_limit)
            _evaluators[key] = ev
        return ev


def w_integer(phi: PhiFunction, n: int) -> float:
    return get_evaluator(phi).w_integer(n)


def w_real(phi: PhiFunction, x: float) -> float:
    return get_evaluator(phi).w_real(x)


def psi(phi: PhiFunction, y: float, step: float | None = None) -> float:
    return get_evaluator(phi).psi(y, step=step)
