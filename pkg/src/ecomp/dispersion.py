"""Dispersion classification for the (rho, phi) count family.

The variance-to-mean ratio of the distribution is tied to the dispersion
function d(lambda) = lambda/phi(lambda): a non-decreasing d gives
overdispersion, non-increasing gives underdispersion.  Structural shortcuts
exist through the declared function classes (special Bernstein functions are
overdispersed, their inverses underdispersed) and, for smooth non-decreasing
phi, through the pointwise test phi'(lambda) vs phi(lambda)/lambda.

All structural verdicts here are sufficient-condition checks verified on a
finite prefix or grid; the numeric index Var/Mean is computed alongside as
the ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .distribution import EComPoisson
from .errors import DomainError, PreconditionError
from .phi import PhiFunction

TIE_TOL = 1e-12          # successive log-ratio deviations below this are ties
DEFAULT_N_MAX = 200
DERIV_BAND = 1e-9        # relative band for the derivative comparison


@dataclass(frozen=True)
class DispersionReport:
    classification: str              # over | under | equi | indeterminate
    method: str                      # d_monotone | derivative_condition | class_flag | numeric
    grid: tuple
    evidence: dict
    numeric_index: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def classify_by_d(phi: PhiFunction, n_max: int = DEFAULT_N_MAX,
                  tie_tol: float = TIE_TOL) -> DispersionReport:
    """Monotonicity of d(n) = n/phi(n) over n = 1..n_max+1.

    Non-decreasing throughout means over, non-increasing under, constant
    equi, anything mixed indeterminate.  The check covers a prefix of an
    all-n condition, so it is reported as prefix evidence, not proof.
    """
    n_max = int(n_max)
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    hi = n_max + 1
    if hi + 1 > phi.domain_sup:
        hi = int(math.ceil(phi.domain_sup)) - 1
        if hi < 2:
            raise DomainError(
                f"{phi.spec_id}: domain too small for a monotonicity prefix"
            )
    ns = np.arange(1, hi + 1, dtype=float)
    logd = np.log(ns) - phi.log_eval(ns)
    steps = np.diff(logd)
    ups = int(np.sum(steps > tie_tol))
    downs = int(np.sum(steps < -tie_tol))
    ties = int(steps.size - ups - downs)
    if ups and downs:
        cls = "indeterminate"
    elif ups:
        cls = "over"
    elif downs:
        cls = "under"
    else:
        cls = "equi"
    return DispersionReport(
        classification=cls, method="d_monotone", grid=(1, hi),
        evidence={
            "steps_up": ups, "steps_down": downs, "ties": ties,
            "min_step": float(np.min(steps)), "max_step": float(np.max(steps)),
        },
    )


def _default_grid(phi: PhiFunction) -> np.ndarray:
    if math.isinf(phi.domain_sup):
        return np.geomspace(0.25, 32.0, 21)
    d = phi.domain_sup
    return np.geomspace(d / 64.0, d * (1.0 - 1.0 / 64.0), 21)


def classify_by_derivative(phi: PhiFunction, grid=None) -> DispersionReport:
    """Pointwise comparison of phi'(lambda) against phi(lambda)/lambda.

    For non-decreasing C^1 phi: phi' <= phi/lambda on the grid means over,
    >= means under, equality within band equi.
    """
    if not phi.nondecreasing:
        raise PreconditionError(
            f"{phi.spec_id} is not non-decreasing; the derivative test "
            "does not apply"
        )
    g = _default_grid(phi) if grid is None else np.asarray(grid, dtype=float)
    if g.size == 0:
        raise DomainError("empty comparison grid")
    d1 = phi.deriv1(g)
    ratio = phi(g) / g
    scale = np.maximum(np.abs(d1), np.abs(ratio))
    le = bool(np.all(d1 <= ratio + DERIV_BAND * scale))
    ge = bool(np.all(d1 >= ratio - DERIV_BAND * scale))
    if le and ge:
        cls = "equi"
    elif le:
        cls = "over"
    elif ge:
        cls = "under"
    else:
        cls = "indeterminate"
    gap = d1 - ratio
    return DispersionReport(
        classification=cls, method="derivative_condition",
        grid=tuple(float(x) for x in g),
        evidence={
            "min_gap": float(np.min(gap)), "max_gap": float(np.max(gap)),
        },
    )


def classify_by_flags(phi: PhiFunction) -> DispersionReport:
    """Structural verdict from the declared function classes.

    SBF membership is sufficient for overdispersion and ISBF for
    underdispersion; a function carrying both (the identity) sits exactly
    on the Poisson boundary.
    """
    sbf = "SBF" in phi.flags
    isbf = "ISBF" in phi.flags
    if sbf and isbf:
        cls = "equi"
    elif sbf:
        cls = "over"
    elif isbf:
        cls = "under"
    else:
        cls = "indeterminate"
    return DispersionReport(
        classification=cls, method="class_flag", grid=(),
        evidence={"flags": sorted(phi.flags)},
    )


def numeric_dispersion(dist: EComPoisson) -> float:
    """Var X / E X from the moment machinery."""
    return dist.variance() / dist.mean()


def weighted_log_convexity(phi: PhiFunction, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """Second differences of log w(n), w(n) = n!/prod_{k<=n} phi(k).

    The family is the Poisson law reweighted by w; log-convex weights mean
    overdispersion, log-concave mean underdispersion.  The second difference
    of log w at n equals the first difference of log d at n+1.
    """
    n_max = int(n_max)
    hi = n_max + 2
    if hi > phi.domain_sup:
        hi = int(math.ceil(phi.domain_sup)) - 1
    if hi < 3:
        raise DomainError(f"{phi.spec_id}: domain too small")
    ns = np.arange(1, hi + 1, dtype=float)
    logw_steps = np.log(ns) - phi.log_eval(ns)   # log w(n) - log w(n-1)
    return np.diff(logw_steps)


def full_report(phi: PhiFunction, rho: float | None = None,
                n_max: int = DEFAULT_N_MAX) -> dict:
    """All applicable classifications, plus the numeric index when rho given."""
    out = {
        "phi": phi.spec_id,
        "by_flags": classify_by_flags(phi).to_dict(),
        "by_d": classify_by_d(phi, n_max=n_max).to_dict(),
    }
    if phi.nondecreasing:
        out["by_derivative"] = classify_by_derivative(phi).to_dict()
    else:
        out["by_derivative"] = None
    if rho is not None:
        dist = EComPoisson(float(rho), phi)
        idx = numeric_dispersion(dist)
        if abs(idx - 1.0) <= 1e-9:
            verdict = "equi"
        else:
            verdict = "over" if idx > 1.0 else "under"
        out["numeric"] = DispersionReport(
            classification=verdict, method="numeric", grid=(),
            evidence={"rho": float(rho)}, numeric_index=idx,
        ).to_dict()
    else:
        out["numeric"] = None
    return out
