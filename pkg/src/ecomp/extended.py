"""Generalized count family with pmf proportional to Γ(n+γ)ρⁿ/(n!·V_φ(αn+β)).

Here V_φ interpolates the running product φ(1)···φ(m−1): it is the product
itself when the argument grid αn+β stays on the integers, and the real
extension from :mod:`ecomp.bernstein_gamma` otherwise.  Setting α=β=γ=1
recovers the base family of :mod:`ecomp.distribution`; other corners recover
the hyper-Poisson and an alternative Mittag-Leffler distribution.

Normalizers are series

    Z_{α,β,γ}(ρ, φ) = Σ_k Γ(k+γ) ρᵏ / (k! V_φ(αk+β)),

summed in log scale and truncated under a certified ratio bound: beyond the
truncation index the term ratio is majorized by

    q = ρ · max(1, (n+γ)/(n+1)) · V_φ(αn+β)/V_φ(α(n+1)+β),

valid because log V_φ is convex, so the V ratio grows with n.  A trailing
window of observed ratios must be non-increasing before the bound is
trusted, which guards the pre-asymptotic range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp, polygamma

from .bernstein_gamma import BernsteinGammaEvaluator, get_evaluator
from .combinatorics import stirling2
from .distribution import EComPoisson
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    ResourceError,
)
from .phi import PhiFunction, parse_phi

DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 20000
_GUARD = 1.0 - 1e-9
_MIN_STOP = 8            # never certify a tail before this many terms
_RATIO_WINDOW = 5        # trailing observed ratios must be non-increasing
EQUI_BAND = 1e-8         # relative band for the moment dispersion verdict
PSI_EQUI_BAND = 1e-4     # relative band for pointwise psi' comparisons
PSI_GRID = (0.5, 1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class TuranReport:
    """Both readings of the Turán-type inequality for Z_{α,β,γ}.

    ``printed_value`` uses the first index 2α in the middle normalizer;
    ``variance_value`` uses α with the doubled shift on the second index,
    which equals (Z/ρ)·Var X and is therefore non-negative whenever the
    distribution exists.  Neither sign is asserted; both are reported.
    """

    rho: float
    alpha: float
    beta: float
    gamma: float
    printed_value: float
    printed_nonnegative: bool
    variance_value: float
    variance_nonnegative: bool


@dataclass(frozen=True)
class PsiDispersionReport:
    """Pointwise comparison of ψ′_id(y+γ) against factors of ψ′_φ(αy+β).

    ``classification`` follows the printed factor α; the chain rule of the
    underlying log-convexity argument suggests α² instead, so the verdict
    under that reading is carried alongside.
    """

    grid: tuple
    left: tuple
    right_printed: tuple
    right_squared: tuple
    classification: str
    classification_squared: str


class ExtendedDist:
    """Distribution with parameters (ρ, φ, α, β, γ), all positive.

    ``alpha`` and ``beta`` on integer values select exact integer products
    for V_φ; any other values go through the real-argument limit evaluator.
    """

    def __init__(self, rho: float, phi, alpha: float = 1.0, beta: float = 1.0,
                 gamma: float = 1.0, tol: float = DEFAULT_TOL,
                 max_terms: int = DEFAULT_MAX_TERMS):
        if isinstance(phi, str):
            phi = parse_phi(phi)
        if not isinstance(phi, PhiFunction):
            raise ConfigError("phi must be a PhiFunction or a catalog id")
        rho, alpha, beta, gamma = map(float, (rho, alpha, beta, gamma))
        for name, v in (("rho", rho), ("alpha", alpha), ("beta", beta),
                        ("gamma", gamma)):
            if not (v > 0.0) or not math.isfinite(v):
                raise DomainError(f"{name} must be a positive finite real")
        if not math.isinf(phi.domain_sup):
            raise DomainError(
                f"{phi.spec_id} has a bounded domain; the generalized family "
                "needs phi on all of (0, inf)"
            )
        if phi.bounded and rho > _GUARD * phi.limit ** alpha:
            raise DivergenceError(
                f"series diverges: rho={rho} against limit "
                f"{phi.limit}^{alpha} for {phi.spec_id}"
            )
        self.rho = rho
        self.phi = phi
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.tol = float(tol)
        self.max_terms = int(max_terms)
        self.v_mode = (
            "integer" if alpha.is_integer() and beta.is_integer() and beta >= 1.0
            else "real"
        )
        self._ev: BernsteinGammaEvaluator = get_evaluator(phi)
        self._z_cache: dict = {}
        self._log_z_base = self._log_z(alpha, beta, gamma)
        self.z_value = math.exp(self._log_z_base)

    # -- normalizer machinery --------------------------------------------------

    def _log_v(self, x: float) -> float:
        if self.v_mode == "integer" and float(x).is_integer():
            return self._ev.log_w_integer(int(round(x)))
        return self._ev.log_w_real(x)

    def _log_terms(self, alpha: float, beta: float, gamma: float,
                   count: int) -> np.ndarray:
        ks = np.arange(count, dtype=float)
        logv = np.array([self._log_v(alpha * k + beta) for k in ks])
        return (
            gammaln(ks + gamma) + ks * math.log(self.rho)
            - gammaln(ks + 1.0) - logv
        )

    def _log_z(self, alpha: float, beta: float, gamma: float) -> float:
        key = (alpha, beta, gamma)
        if key in self._z_cache:
            return self._z_cache[key]
        n = 16
        logt = self._log_terms(alpha, beta, gamma, n + 2)
        while True:
            # majorant of every term ratio past n: the observed ratio with
            # its Gamma factor clamped to 1, valid by log-convexity of V
            logq = (logt[n + 1] - logt[n]) + max(
                0.0, math.log((n + 1.0) / (n + gamma))
            )
            ratios = np.diff(logt[: n + 2])
            window = ratios[-_RATIO_WINDOW:]
            monotone = bool(np.all(np.diff(window) <= 1e-12))
            if n >= _MIN_STOP and logq < 0.0 and monotone:
                q = math.exp(logq)
                logpartial = float(logsumexp(logt[: n + 1]))
                logtail = logt[n] + logq - math.log1p(-q)
                if logtail <= math.log(self.tol) + logpartial:
                    self._z_cache[key] = logpartial
                    return logpartial
            if n >= self.max_terms:
                raise ResourceError(
                    f"normalizer Z_({alpha},{beta},{gamma}) not certified "
                    f"within max_terms={self.max_terms}"
                )
            n = min(2 * n, self.max_terms)
            logt = self._log_terms(alpha, beta, gamma, n + 2)

    def normalizer(self, alpha: float | None = None, beta: float | None = None,
                   gamma: float | None = None) -> float:
        """Z at the instance parameters, or at shifted indices."""
        a = self.alpha if alpha is None else float(alpha)
        b = self.beta if beta is None else float(beta)
        g = self.gamma if gamma is None else float(gamma)
        return math.exp(self._log_z(a, b, g))

    # -- pmf and moments ---------------------------------------------------------

    def log_pmf(self, n) -> float:
        k = int(n)
        if k != n or k < 0:
            raise DomainError(f"support point must be a natural number, got {n!r}")
        return (
            gammaln(k + self.gamma) + k * math.log(self.rho)
            - gammaln(k + 1.0) - self._log_v(self.alpha * k + self.beta)
            - self._log_z_base
        )

    def pmf(self, n) -> float:
        return math.exp(self.log_pmf(n))

    def factorial_moment(self, s: int) -> float:
        """m_s = ρ^s Z_{α, sα+β, γ+s} / Z_{α,β,γ}."""
        s = self._check_order(s)
        shifted = self._log_z(self.alpha, s * self.alpha + self.beta,
                              self.gamma + s)
        return math.exp(s * math.log(self.rho) + shifted - self._log_z_base)

    def moment(self, s: int) -> float:
        """E X^s by the Stirling decomposition over shifted normalizers."""
        s = self._check_order(s)
        total = 0.0
        for r in range(1, s + 1):
            shifted = self._log_z(self.alpha, r * self.alpha + self.beta,
                                  self.gamma + r)
            total += stirling2(s, r) * math.exp(
                r * math.log(self.rho) + shifted - self._log_z_base
            )
        return total

    def _check_order(self, s) -> int:
        k = int(s)
        if k != s or k < 1:
            raise DomainError("moment order must be a positive integer")
        return k

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        m = self.mean()
        return self.moment(2) - m * m

    def dispersion_index(self) -> float:
        return self.variance() / self.mean()

    # -- structural reports --------------------------------------------------------

    def turan_check(self) -> TuranReport:
        a, b, g, rho = self.alpha, self.beta, self.gamma, self.rho
        z = self.z_value
        z1 = self.normalizer(a, a + b, g + 1.0)
        z2_printed = self.normalizer(2.0 * a, a + b, g + 2.0)
        z2_second = self.normalizer(a, 2.0 * a + b, g + 2.0)
        printed = z1 + rho * z2_printed - rho * z1 * z1 / z
        variance_form = z1 + rho * z2_second - rho * z1 * z1 / z
        return TuranReport(
            rho=rho, alpha=a, beta=b, gamma=g,
            printed_value=printed,
            printed_nonnegative=bool(printed >= -1e-12 * abs(z1)),
            variance_value=variance_form,
            variance_nonnegative=bool(variance_form >= -1e-12 * abs(z1)),
        )

    def moment_dispersion_test(self) -> str:
        """Verdict over/under/equi from the normalizer product criterion."""
        a, b, g = self.alpha, self.beta, self.gamma
        z = self.z_value
        z1 = self.normalizer(a, a + b, g + 1.0)
        z2 = self.normalizer(a, 2.0 * a + b, g + 2.0)
        diff = (z * z2 - z1 * z1) / (z1 * z1)
        if abs(diff) <= EQUI_BAND:
            return "equi"
        return "over" if diff > 0.0 else "under"

    def psi_dispersion_test(self, grid=PSI_GRID) -> PsiDispersionReport:
        left, rp, rs = [], [], []
        for y in grid:
            left.append(float(polygamma(1, y + self.gamma)))
            d = self._ev.psi_prime(self.alpha * y + self.beta)
            rp.append(self.alpha * d)
            rs.append(self.alpha * self.alpha * d)

        def verdict(rights):
            ge = all(
                l >= r - PSI_EQUI_BAND * max(abs(l), abs(r))
                for l, r in zip(left, rights)
            )
            le = all(
                l <= r + PSI_EQUI_BAND * max(abs(l), abs(r))
                for l, r in zip(left, rights)
            )
            if ge and le:
                return "equi"
            if ge:
                return "over"
            if le:
                return "under"
            return "inconclusive"

        return PsiDispersionReport(
            grid=tuple(grid), left=tuple(left),
            right_printed=tuple(rp), right_squared=tuple(rs),
            classification=verdict(rp),
            classification_squared=verdict(rs),
        )

    # -- special-case constructors ------------------------------------------------

    @classmethod
    def poisson(cls, rho: float, **kw) -> "ExtendedDist":
        return cls(rho, parse_phi("id"), 1.0, 1.0, 1.0, **kw)

    @classmethod
    def com_poisson(cls, rho: float, delta: float, **kw) -> "ExtendedDist":
        return cls(rho, parse_phi(f"power:{delta}"), 1.0, 1.0, 1.0, **kw)

    @classmethod
    def hyper_poisson(cls, rho: float, beta: float, **kw) -> "ExtendedDist":
        return cls(rho, parse_phi("id"), 1.0, beta, 1.0, **kw)

    @classmethod
    def alt_mittag_leffler(cls, rho: float, alpha: float, beta: float,
                           **kw) -> "ExtendedDist":
        return cls(rho, parse_phi("id"), alpha, beta, 1.0, **kw)

    def base_distribution(self) -> EComPoisson:
        """The α=β=γ=1 family member with the same (ρ, φ)."""
        if (self.alpha, self.beta, self.gamma) != (1.0, 1.0, 1.0):
            raise DomainError("base reduction requires alpha = beta = gamma = 1")
        return EComPoisson(self.rho, self.phi)

    # -- serialization ---------------------------------------------------------------

    def to_spec(self) -> dict:
        return {
            "phi": self.phi.spec_id,
            "rho": self.rho,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "tol": self.tol,
        }

    @classmethod
    def from_spec(cls, spec: dict) -> "ExtendedDist":
        if not isinstance(spec, dict):
            raise ConfigError("distribution spec must be a JSON object")
        try:
            phi_id = spec["phi"]
            rho = float(spec["rho"])
        except KeyError as exc:
            raise ConfigError(f"distribution spec missing field {exc}") from None
        return cls(
            rho, parse_phi(phi_id),
            alpha=float(spec.get("alpha", 1.0)),
            beta=float(spec.get("beta", 1.0)),
            gamma=float(spec.get("gamma", 1.0)),
            tol=float(spec.get("tol", DEFAULT_TOL)),
        )

    def __repr__(self):
        return (
            f"ExtendedDist(rho={self.rho}, phi={self.phi.spec_id!r}, "
            f"alpha={self.alpha}, beta={self.beta}, gamma={self.gamma})"
        )


# -- functional forms of the operations --------------------------------------


def z_general(rho: float, alpha: float, beta: float, gamma: float, phi,
              tol: float = DEFAULT_TOL) -> float:
    """Certified Z_{α,β,γ}(ρ, φ)."""
    return ExtendedDist(rho, phi, alpha, beta, gamma, tol=tol).z_value


def pmf_general(d: ExtendedDist, n: int) -> float:
    return d.pmf(n)


def factorial_moment_general(d: ExtendedDist, s: int) -> float:
    return d.factorial_moment(s)


def moment_general(d: ExtendedDist, s: int) -> float:
    return d.moment(s)


def turan_check(d: ExtendedDist) -> TuranReport:
    return d.turan_check()


def moment_dispersion_test(d: ExtendedDist) -> str:
    return d.moment_dispersion_test()


def psi_dispersion_test(d: ExtendedDist, grid=PSI_GRID) -> PsiDispersionReport:
    return d.psi_dispersion_test(grid)
