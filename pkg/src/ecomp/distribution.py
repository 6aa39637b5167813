"""Count distributions with pmf proportional to rho^n / prod_{k<=n} phi(k).

The family generalizes the Poisson law (phi = identity) and the COM-Poisson
law (phi(k) = k^delta); the rate function phi comes from the catalog in
:mod:`ecomp.phi`.  The normalizing series

    Z(rho, phi) = 1 + sum_{n>=1} rho^n / (phi(1)...phi(n))

converges for every rho when phi is unbounded and for rho below the limit of
phi otherwise.  All series here are summed in log scale with a certified
geometric tail bound, so truncation error is controlled rather than guessed.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .combinatorics import stirling2
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    EcompError,
    PreconditionError,
    ResourceError,
    UnsupportedOrderError,
)
from .phi import PhiFunction, parse_phi

DEFAULT_TOL = 1e-14
DEFAULT_MAX_TERMS = 100000
MAX_MOMENT_ORDER = 12
_GUARD = 1.0 - 1e-9     # bounded phi: require rho <= _GUARD * lim phi


@dataclass(frozen=True)
class NormalizerResult:
    z: float
    n_trunc: int
    tail_bound: float


@dataclass(frozen=True)
class MarkovBound:
    bound: float
    exact_tail: float


class EComPoisson:
    """Distribution with characteristic couple (rho, phi).

    Parameters
    ----------
    rho : float
        Positive rate ratio (lambda/mu in the queue reading).
    phi : PhiFunction or str
        Catalog rate function, or its catalog id.
    lambda_cap : float, optional
        Support cap: the support is the set of naturals strictly below it.
        Defaults to the domain supremum of phi, which is infinite for the
        forward catalog kinds and finite for inverse kinds.
    tol : float
        Relative tolerance of the certified series truncation.
    max_terms : int
        Hard cap on the number of tabulated terms.

    Instances are immutable except for the lazily extended weight table,
    which is guarded by a lock; sampling takes the caller's generator and
    never touches shared random state.
    """

    def __init__(self, rho: float, phi, lambda_cap: float | None = None,
                 tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS):
        if isinstance(phi, str):
            phi = parse_phi(phi)
        if not isinstance(phi, PhiFunction):
            raise ConfigError("phi must be a PhiFunction or a catalog id")
        rho = float(rho)
        if not (rho > 0.0) or not math.isfinite(rho):
            raise DomainError("rho must be a positive finite real")
        if tol <= 0.0 or tol >= 1.0:
            raise ConfigError("tol must lie in (0, 1)")
        if int(max_terms) < 1:
            raise ConfigError("max_terms must be a positive integer")

        if lambda_cap is None:
            lambda_cap = phi.domain_sup
        lambda_cap = float(lambda_cap)
        if lambda_cap <= 0.0:
            raise ConfigError("lambda_cap must be positive")
        if lambda_cap > phi.domain_sup:
            raise ConfigError(
                f"lambda_cap {lambda_cap} exceeds the domain of {phi.spec_id}"
            )

        self.rho = rho
        self.phi = phi
        self.lambda_cap = lambda_cap
        self.tol = float(tol)
        self.max_terms = int(max_terms)
        self._lock = threading.RLock()

        if math.isinf(lambda_cap):
            self._n_max = None
            # convergence requires rho < lim phi when phi is bounded
            if phi.bounded and rho > _GUARD * phi.limit:
                raise DivergenceError(
                    f"series diverges (or is too close to critical): rho={rho} "
                    f"vs limit {phi.limit} of {phi.spec_id}"
                )
        else:
            self._n_max = math.ceil(lambda_cap) - 1
            if self._n_max >= max_terms:
                raise ResourceError(
                    f"finite support {self._n_max + 1} exceeds max_terms"
                )

        # log phi at integers 1..M and its cumulative sum C (C[0] = 0)
        self._C = np.zeros(1)
        self._logw = np.zeros(1)        # log w_n = n log rho - C[n]
        self._build_initial_table()

    # -- table construction and growth ---------------------------------------

    def _grow_to(self, length: int) -> None:
        # caller holds the lock; extends _C and _logw to at least `length`
        cur = self._C.shape[0]
        if length <= cur:
            return
        if length - 1 > self.max_terms:
            raise ResourceError(
                f"weight table would exceed max_terms={self.max_terms}"
            )
        ks = np.arange(cur, length, dtype=float)
        logphi = self.phi.log_eval(ks)
        newC = np.concatenate([self._C, self._C[-1] + np.cumsum(logphi)])
        ns = np.arange(length, dtype=float)
        self._C = newC
        self._logw = ns * math.log(self.rho) - newC

    def _tail_ratio(self, n: int) -> float:
        """Upper bound on w_{m+1}/w_m over all m >= n."""
        lo = self.phi.integer_tail_inf(n + 1)
        return self.rho / lo if lo > 0.0 else math.inf

    def _build_initial_table(self) -> None:
        if self._n_max is not None:
            self._grow_to(self._n_max + 1)
            self._logZ = float(logsumexp(self._logw))
            self.n_trunc = self._n_max
            self.tail_bound = 0.0
        else:
            n = self._certified_stop()
            self._logZ = float(logsumexp(self._logw[: n + 1]))
            self.n_trunc = n
            r = self._tail_ratio(n)
            self.tail_bound = float(
                math.exp(self._logw[n] - self._logZ) * r / (1.0 - r)
            )
        self.z_value = math.exp(self._logZ)
        self._cum = np.cumsum(np.exp(self._logw - self._logZ))

    def _certified_stop(self) -> int:
        """Smallest n with a certified relative tail bound below tol."""
        length = 64
        while True:
            self._grow_to(min(length + 1, self.max_terms + 1))
            m = min(length, self._logw.shape[0] - 1)
            logw = self._logw[:m]
            logpartial = np.logaddexp.accumulate(logw)
            if self.phi.nondecreasing:
                # inf over m > n of phi(m) is phi(n+1); read it off the table
                logr = math.log(self.rho) - (self._C[1: m + 1] - self._C[:m])
            else:
                logr = np.full(m, math.log(self.rho) - math.log(self.phi.limit))
            r = np.exp(logr)
            ok = r < 1.0
            logtail = np.where(
                ok,
                logw + logr - np.log1p(-np.where(ok, r, 0.0)),
                np.inf,
            )
            good = ok & (logtail <= math.log(self.tol) + logpartial)
            idx = np.flatnonzero(good)
            if idx.size:
                return int(idx[0])
            if length > self.max_terms:
                raise ResourceError(
                    f"no certified truncation within max_terms={self.max_terms} "
                    f"(rho={self.rho}, phi={self.phi.spec_id})"
                )
            length *= 2

    def _ensure_cum(self, upto: int) -> None:
        with self._lock:
            if self._n_max is not None:
                upto = min(upto, self._n_max)
            if upto < self._cum.shape[0]:
                return
            self._grow_to(upto + 1)
            start = self._cum.shape[0]
            extra = np.exp(self._logw[start: upto + 1] - self._logZ)
            self._cum = np.concatenate(
                [self._cum, self._cum[-1] + np.cumsum(extra)]
            )

    # -- basic queries --------------------------------------------------------

    @property
    def support_max(self) -> float:
        """Largest support point, inf for unbounded support."""
        return math.inf if self._n_max is None else float(self._n_max)

    @property
    def pmf_table(self) -> np.ndarray:
        """pmf values for n = 0..n_trunc (a copy)."""
        return np.exp(self._logw[: self.n_trunc + 1] - self._logZ)

    def _check_n(self, n) -> int:
        k = int(n)
        if k != n or k < 0:
            raise DomainError(f"support point must be a natural number, got {n!r}")
        return k

    def log_pmf(self, n) -> float:
        k = self._check_n(n)
        if k >= self.lambda_cap:
            raise DomainError(
                f"{k} is outside the support cap {self.lambda_cap}"
            )
        with self._lock:
            self._grow_to(k + 1)
            return float(self._logw[k] - self._logZ)

    def pmf(self, n) -> float:
        return math.exp(self.log_pmf(n))

    def pmf_array(self, count: int) -> np.ndarray:
        """pmf at n = 0..count-1; zero beyond a finite support."""
        count = int(count)
        if count < 0:
            raise DomainError("count must be nonnegative")
        out = np.zeros(count)
        hi = count if self._n_max is None else min(count, self._n_max + 1)
        if hi > 0:
            with self._lock:
                self._grow_to(hi)
                out[:hi] = np.exp(self._logw[:hi] - self._logZ)
        return out

    def cdf(self, n) -> float:
        k = self._check_n(n)
        if self._n_max is not None and k > self._n_max:
            return 1.0
        if self._n_max is None and k > self.n_trunc:
            # beyond the certified truncation the missing mass is below tol;
            # do not grow the table for astronomically large arguments
            k = self.n_trunc
        self._ensure_cum(k)
        return min(1.0, float(self._cum[k]))

    def quantile(self, q: float) -> int:
        """Smallest n with cdf(n) >= q (ties resolved right-continuously)."""
        q = float(q)
        if not (0.0 <= q <= 1.0):
            raise DomainError("quantile level must lie in [0, 1]")
        return int(self._quantile_many(np.asarray([q]))[0])

    def _quantile_many(self, qs: np.ndarray) -> np.ndarray:
        with self._lock:
            idx = np.searchsorted(self._cum, qs, side="left")
            pending = idx >= self._cum.shape[0]
            while np.any(pending):
                if self._n_max is not None and self._cum.shape[0] > self._n_max:
                    idx[pending] = self._n_max
                    break
                gap = float(np.max(qs[pending])) - float(self._cum[-1])
                r = self._tail_ratio(self._cum.shape[0] - 1)
                remaining = (
                    math.exp(self._logw[self._cum.shape[0] - 1] - self._logZ)
                    * r / (1.0 - r) if r < 1.0 else math.inf
                )
                if remaining < gap:
                    # the requested level is unreachable by rounding; the
                    # answer is the far end of the tabulated mass
                    idx[pending] = self._cum.shape[0] - 1
                    break
                try:
                    self._ensure_cum(2 * self._cum.shape[0])
                except ResourceError:
                    raise ResourceError(
                        "quantile tail extension exhausted max_terms"
                    ) from None
                idx[pending] = np.searchsorted(
                    self._cum, qs[pending], side="left"
                )
                pending = idx >= self._cum.shape[0]
            return idx

    def sample(self, count: int, rng) -> np.ndarray:
        """Inverse-cdf draws; rng is a numpy Generator or an integer seed."""
        count = int(count)
        if count < 0:
            raise DomainError("count must be nonnegative")
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        if count == 0:
            return np.zeros(0, dtype=np.int64)
        u = rng.random(count)
        return self._quantile_many(u).astype(np.int64)

    def pgf(self, u: float) -> float:
        """Probability generating function E u^X = Z(u rho, phi)/Z(rho, phi)."""
        u = float(u)
        if abs(u) > 1.0:
            raise DomainError("pgf argument must satisfy |u| <= 1")
        with self._lock:
            n = self.n_trunc if self._n_max is None else self._n_max
            self._grow_to(n + 1)
            p = np.exp(self._logw[: n + 1] - self._logZ)
        return float(np.dot(p, np.power(u, np.arange(n + 1))))

    # -- moments --------------------------------------------------------------

    def _log_falling_weighted(self, s: int) -> float:
        """log of sum_{k>=s} (k)_s w_k, certified to self.tol relative.

        (k)_s is the falling factorial; the sum is rho^s D^s Z in disguise.
        """
        with self._lock:
            if self._n_max is not None:
                hi = self._n_max
                if hi < s:
                    return -math.inf
                ks = np.arange(s, hi + 1, dtype=float)
                logff = gammaln(ks + 1.0) - gammaln(ks - s + 1.0)
                return float(logsumexp(logff + self._logw[s: hi + 1]))
            n = max(self.n_trunc, s) + s
            while True:
                self._grow_to(n + 1)
                ks = np.arange(s, n + 1, dtype=float)
                logff = gammaln(ks + 1.0) - gammaln(ks - s + 1.0)
                logpartial = float(logsumexp(logff + self._logw[s: n + 1]))
                r = self._tail_ratio(n) * (n + 1.0) / (n + 1.0 - s)
                if r < 1.0:
                    logterm = float(logff[-1] + self._logw[n])
                    logtail = logterm + math.log(r) - math.log1p(-r)
                    if logtail <= math.log(self.tol) + logpartial:
                        return logpartial
                if n >= self.max_terms:
                    raise ResourceError(
                        f"moment series for s={s} not certified within "
                        f"max_terms={self.max_terms}"
                    )
                n = min(2 * n, self.max_terms)

    def _check_order(self, s) -> int:
        k = int(s)
        if k != s or k < 1:
            raise DomainError("moment order must be a positive integer")
        if k > MAX_MOMENT_ORDER:
            raise UnsupportedOrderError(
                f"moment order {k} above supported cap {MAX_MOMENT_ORDER}"
            )
        return k

    def factorial_moment(self, s: int) -> float:
        """E[X(X-1)...(X-s+1)] = rho^s D^s Z / Z, summed termwise."""
        s = self._check_order(s)
        return math.exp(self._log_falling_weighted(s) - self._logZ)

    def moment(self, s: int) -> float:
        """E X^s through the Stirling decomposition into factorial moments."""
        s = self._check_order(s)
        total = 0.0
        for j in range(1, s + 1):
            total += stirling2(s, j) * math.exp(
                self._log_falling_weighted(j) - self._logZ
            )
        return total

    def normalizer_derivative(self, j: int) -> float:
        """D^j Z with respect to rho, summed termwise (j = 0 gives Z)."""
        if j == 0:
            return self.z_value
        j = self._check_order(j)
        return math.exp(
            self._log_falling_weighted(j) - j * math.log(self.rho)
        )

    def mean(self) -> float:
        return self.factorial_moment(1)

    def variance(self) -> float:
        m1 = self.factorial_moment(1)
        return self.factorial_moment(2) + m1 - m1 * m1

    def dispersion_index(self) -> float:
        """Var X / E X; 1 for the Poisson case."""
        return self.variance() / self.mean()

    def phi_factorial_moment(self, s: int) -> float:
        """E[phi(X) phi(X-1) ... phi(X-s+1)], summed over n >= s.

        Terms with n < s would evaluate phi at non-positive arguments, which
        lie outside every catalog domain, so they are omitted; with that
        convention the telescoped value equals rho^s.
        """
        k = int(s)
        if k != s or k < 1:
            raise DomainError("order must be a positive integer")
        with self._lock:
            if self._n_max is not None:
                hi = self._n_max
            else:
                # same certified index as Z, shifted by the telescoping
                hi = self.n_trunc + k
            if hi < k:
                return 0.0
            self._grow_to(hi + 1)
            ns = np.arange(k, hi + 1)
            logprod = self._C[ns] - self._C[ns - k]
            return float(
                math.exp(logsumexp(self._logw[k: hi + 1] + logprod) - self._logZ)
            )

    def markov_bound(self, a: float) -> MarkovBound:
        """Tail bound P(X >= a) <= rho/phi(a) for non-decreasing phi."""
        a = float(a)
        if not self.phi.nondecreasing:
            raise PreconditionError(
                f"{self.phi.spec_id} is not non-decreasing; the phi-Markov "
                "bound does not apply"
            )
        bound = self.rho / self.phi(a)   # DomainError if a outside domain
        lo = math.ceil(a)
        if self._n_max is not None and lo > self._n_max:
            exact = 0.0
        else:
            exact = 1.0 - (self.cdf(lo - 1) if lo >= 1 else 0.0)
        if exact > bound + 1e-12:
            raise EcompError(
                f"computed tail {exact} exceeds its certified bound {bound}"
            )
        return MarkovBound(bound=bound, exact_tail=exact)

    # -- serialization ---------------------------------------------------------

    def to_spec(self) -> dict:
        cap = "inf" if math.isinf(self.lambda_cap) else self.lambda_cap
        return {
            "phi": self.phi.spec_id,
            "rho": self.rho,
            "lambda_cap": cap,
            "tol": self.tol,
        }

    @classmethod
    def from_spec(cls, spec: dict) -> "EComPoisson":
        if not isinstance(spec, dict):
            raise ConfigError("distribution spec must be a JSON object")
        try:
            phi_id = spec["phi"]
            rho = float(spec["rho"])
        except KeyError as exc:
            raise ConfigError(f"distribution spec missing field {exc}") from None
        cap = spec.get("lambda_cap", None)
        if cap == "inf":
            cap = math.inf
        elif cap is not None:
            cap = float(cap)
        tol = float(spec.get("tol", DEFAULT_TOL))
        return cls(rho, parse_phi(phi_id), lambda_cap=cap, tol=tol)

    def __repr__(self):
        return (
            f"EComPoisson(rho={self.rho}, phi={self.phi.spec_id!r}, "
            f"lambda_cap={self.lambda_cap})"
        )


def normalizer(rho: float, phi, tol: float = DEFAULT_TOL,
               max_terms: int = DEFAULT_MAX_TERMS) -> NormalizerResult:
    """Certified evaluation of Z(rho, phi) on the unbounded support."""
    d = EComPoisson(rho, phi, lambda_cap=math.inf, tol=tol, max_terms=max_terms)
    return NormalizerResult(
        z=d.z_value, n_trunc=d.n_trunc,
        tail_bound=d.tail_bound * d.z_value,
    )
