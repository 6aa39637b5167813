"""Birth-death queue with state-dependent service rate mu*phi(n).

The chain jumps up at rate lambda (blocked in the top state when the support
is capped) and down from state n at rate mu*phi(n); its stationary law is the
(rho, phi) distribution with rho = lambda/mu.  The simulator is event-driven
and exact: holding times are exponential in the total exit rate, the next
event is an arrival with probability lambda/(lambda + mu*phi(n)).

Randomness comes from PCG64 streams spawned from a single SeedSequence, one
stream per replicate, so results are reproducible bit for bit and replicates
can run in any order.  The inner loop lives in a compiled extension when
available and in a pure-Python module otherwise; both consume the identical
draw sequence, so the kernels are interchangeable without changing results.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .distribution import EComPoisson
from .errors import ConfigError, DivergenceError, MismatchError
from .phi import PhiFunction, parse_phi

_GUARD = 1.0 - 1e-9

try:
    from . import _queue_kernel as _default_kernel
    _DEFAULT_KIND = "compiled"
except ImportError:                                    # pragma: no cover
    from . import _queue_kernel_py as _default_kernel
    _DEFAULT_KIND = "python"

if os.environ.get("ECOMP_PURE_KERNEL"):
    from . import _queue_kernel_py as _default_kernel
    _DEFAULT_KIND = "python"

KERNEL_KIND = _DEFAULT_KIND


def _resolve_kernel(kernel: str | None):
    if kernel is None:
        return _default_kernel, _DEFAULT_KIND
    if kernel == "python":
        from . import _queue_kernel_py as k
        return k, "python"
    if kernel == "compiled":
        try:
            from . import _queue_kernel as k
        except ImportError:
            raise ConfigError(
                "compiled kernel requested but the extension is not built"
            ) from None
        return k, "compiled"
    raise ConfigError(f"unknown kernel {kernel!r} (use 'python' or 'compiled')")


@dataclass(frozen=True)
class QueueScenario:
    """Arrival/service rates, support cap, horizon and seed for one run."""

    lam: float
    mu: float
    phi: PhiFunction
    lambda_cap: float = math.inf
    horizon: float = 1e6
    burn_in: float | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.phi, str):
            object.__setattr__(self, "phi", parse_phi(self.phi))
        if not isinstance(self.phi, PhiFunction):
            raise ConfigError("phi must be a PhiFunction or a catalog id")
        if self.lam < 0.0 or not math.isfinite(self.lam):
            raise ConfigError("arrival rate must be a nonnegative finite real")
        if self.mu <= 0.0 or not math.isfinite(self.mu):
            raise ConfigError("service rate must be a positive finite real")
        if self.horizon <= 0.0:
            raise ConfigError("horizon must be positive")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", 0.1 * self.horizon)
        if not (0.0 <= self.burn_in < self.horizon):
            raise ConfigError("burn_in must lie in [0, horizon)")
        if self.lambda_cap <= 0.0:
            raise ConfigError("lambda_cap must be positive")
        if self.lambda_cap > self.phi.domain_sup:
            raise ConfigError(
                f"lambda_cap {self.lambda_cap} exceeds the domain "
                f"of {self.phi.spec_id}"
            )
        # stationarity on unbounded support needs rho below lim phi
        if (math.isinf(self.lambda_cap) and self.phi.bounded
                and self.rho > _GUARD * self.phi.limit):
            raise DivergenceError(
                f"no stationary law: rho={self.rho} vs limit "
                f"{self.phi.limit} of {self.phi.spec_id}"
            )

    @property
    def rho(self) -> float:
        return self.lam / self.mu

    def to_spec(self) -> dict:
        cap = "inf" if math.isinf(self.lambda_cap) else self.lambda_cap
        return {
            "phi": self.phi.spec_id,
            "lambda": self.lam,
            "mu": self.mu,
            "lambda_cap": cap,
            "horizon": self.horizon,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }

    @classmethod
    def from_spec(cls, spec: dict) -> "QueueScenario":
        if not isinstance(spec, dict):
            raise ConfigError("scenario spec must be a JSON object")
        try:
            phi_id = spec["phi"]
            lam = float(spec["lambda"])
            mu = float(spec["mu"])
        except KeyError as exc:
            raise ConfigError(f"scenario spec missing field {exc}") from None
        cap = spec.get("lambda_cap", "inf")
        cap = math.inf if cap == "inf" or cap is None else float(cap)
        burn = spec.get("burn_in", None)
        return cls(
            lam=lam, mu=mu, phi=parse_phi(phi_id), lambda_cap=cap,
            horizon=float(spec.get("horizon", 1e6)),
            burn_in=None if burn is None else float(burn),
            seed=int(spec.get("seed", 0)),
        )

    def distribution(self, tol: float = 1e-14) -> EComPoisson:
        """The stationary law this scenario converges to."""
        return EComPoisson(self.rho, self.phi, lambda_cap=self.lambda_cap,
                           tol=tol)


@dataclass(frozen=True)
class SimResult:
    phi_id: str
    lam: float
    mu: float
    lambda_cap: float
    horizon: float
    burn_in: float
    seed: int
    replicates: int
    kernel: str
    occupancy: np.ndarray          # state -> fraction of post-burn-in time
    total_weight: float
    jumps: int
    final_states: tuple

    @property
    def rho(self) -> float:
        return self.lam / self.mu

    def empirical_mean(self) -> float:
        return float(np.dot(np.arange(self.occupancy.shape[0]),
                            self.occupancy))

    def to_dict(self) -> dict:
        d = {
            "phi": self.phi_id, "lambda": self.lam, "mu": self.mu,
            "lambda_cap": "inf" if math.isinf(self.lambda_cap)
                          else self.lambda_cap,
            "horizon": self.horizon, "burn_in": self.burn_in,
            "seed": self.seed, "replicates": self.replicates,
            "kernel": self.kernel, "jumps": self.jumps,
            "final_states": list(self.final_states),
            "total_weight": self.total_weight,
            "occupancy": self.occupancy.tolist(),
        }
        return d


def _rate_arrays(sc: QueueScenario, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Departure rates mu*phi(n) and arrival probabilities for n < K."""
    dep = np.zeros(K)
    if K > 1:
        dep[1:] = sc.mu * sc.phi(np.arange(1, K, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        parr = np.where(dep > 0.0, sc.lam / (sc.lam + dep), 1.0)
    parr[0] = 1.0
    return dep, parr


def _run_replicate(sc: QueueScenario, bitgen, kernel) -> tuple[np.ndarray, int, int]:
    if math.isinf(sc.lambda_cap):
        K = 64
        top_blocked = False
    else:
        K = math.ceil(sc.lambda_cap)     # states 0..K-1
        top_blocked = True
    dep, parr = _rate_arrays(sc, K)
    occ = np.zeros(K)
    t, n, jumps = 0.0, 0, 0
    while True:
        t, n, j, status = kernel.run_chunk(
            bitgen, sc.lam, dep, parr, occ, t, n,
            sc.horizon, sc.burn_in, top_blocked,
        )
        jumps += j
        if status == 0:
            return occ, jumps, n
        K *= 2
        dep, parr = _rate_arrays(sc, K)
        grown = np.zeros(K)
        grown[: occ.shape[0]] = occ
        occ = grown


def simulate(sc: QueueScenario, replicates: int = 1,
             kernel: str | None = None) -> SimResult:
    """Run the scenario and return the time-weighted occupancy histogram.

    Each replicate gets its own PCG64 stream spawned from
    SeedSequence(sc.seed), so the result is reproducible and independent of
    execution order; histograms merge by plain addition of weighted times.
    """
    replicates = int(replicates)
    if replicates < 1:
        raise ConfigError("replicates must be at least 1")
    mod, kind = _resolve_kernel(kernel)
    streams = np.random.SeedSequence(sc.seed).spawn(replicates)
    occs, jumps, finals = [], 0, []
    for ss in streams:
        occ, j, n_final = _run_replicate(sc, np.random.PCG64(ss), mod)
        occs.append(occ)
        jumps += j
        finals.append(int(n_final))
    width = max(o.shape[0] for o in occs)
    total = np.zeros(width)
    for o in occs:
        total[: o.shape[0]] += o
    weight = float(np.sum(total))
    return SimResult(
        phi_id=sc.phi.spec_id, lam=sc.lam, mu=sc.mu,
        lambda_cap=sc.lambda_cap, horizon=sc.horizon, burn_in=sc.burn_in,
        seed=sc.seed, replicates=replicates, kernel=kind,
        occupancy=total / weight, total_weight=weight,
        jumps=jumps, final_states=tuple(finals),
    )


@dataclass(frozen=True)
class TheoryComparison:
    tv_distance: float
    mean_gap: float


def compare_to_theory(res: SimResult, dist: EComPoisson) -> TheoryComparison:
    """Total-variation distance and mean gap against the stationary law.

    The pmf mass beyond the histogram's range counts fully toward the
    distance, so a short histogram cannot hide a fat tail.
    """
    if dist.phi.spec_id != res.phi_id:
        raise MismatchError(
            f"phi mismatch: {dist.phi.spec_id} vs {res.phi_id}"
        )
    if abs(dist.rho - res.rho) > 1e-12 * max(1.0, abs(res.rho)):
        raise MismatchError(f"rho mismatch: {dist.rho} vs {res.rho}")
    if dist.lambda_cap != res.lambda_cap:
        raise MismatchError(
            f"lambda_cap mismatch: {dist.lambda_cap} vs {res.lambda_cap}"
        )
    K = res.occupancy.shape[0]
    pmf = dist.pmf_array(K)
    tail = max(0.0, 1.0 - float(np.sum(pmf)))
    tv = 0.5 * (float(np.sum(np.abs(res.occupancy - pmf))) + tail)
    gap = abs(res.empirical_mean() - dist.mean())
    return TheoryComparison(tv_distance=tv, mean_gap=gap)


def detailed_balance_residual(sc: QueueScenario, dist: EComPoisson,
                              n_max: int = 50) -> float:
    """Max relative residual of lam*P_{n-1} = mu*phi(n)*P_n over n <= n_max.

    Uses the same rate arrays the simulator runs on, so it checks the
    constructed chain, not a re-derivation of it.
    """
    if math.isfinite(sc.lambda_cap):
        n_max = min(n_max, math.ceil(sc.lambda_cap) - 1)
    dep, _ = _rate_arrays(sc, n_max + 1)
    worst = 0.0
    for n in range(1, n_max + 1):
        lhs = sc.lam * dist.pmf(n - 1)
        rhs = dep[n] * dist.pmf(n)
        if lhs == 0.0 and rhs == 0.0:
            continue
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return worst
