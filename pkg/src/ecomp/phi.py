"""Catalog of rate functions and their inversion machinery.

A :class:`PhiFunction` is a positive, smooth function on an interval
``(0, domain_sup)`` used as the per-occupancy service/decay rate of the count
models in this package.  The catalog collects Bernstein functions paired with
their compositional inverses, plus a few rational examples whose running
products have closed forms.

Conventions
-----------
* ``flags`` is structural metadata declared per catalog entry: ``BF`` for
  Bernstein functions, ``BF0`` for those vanishing at 0+, ``CBF``/``SBF`` for
  the complete/special subclasses, ``IBF``/``ISBF`` for inverses of (special)
  Bernstein functions.  Flags are not recomputed from numerics.
* ``eval``/``deriv1``/``deriv2`` are vectorized over numpy arrays;
  ``derivatives(x, n)`` returns the scalar jet ``[f(x), f'(x), ..., f^(n)(x)]``
  and is the input to the Bell-polynomial formulas.
* Compositional inversion: ``invert(f, s)`` solves ``f(x) = s`` by safeguarded
  Newton iteration inside a doubling bracket; ``inverse_derivative(f, s, n)``
  evaluates the n-th derivative of the inverse through weighted exponential
  Bell polynomials, needing only the jet of ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .combinatorics import MAX_BELL_ORDER, compose_derivatives, weighted_bell
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    UnsupportedOrderError,
)

TOL_INV = 1e-12          # absolute tolerance on the f-residual of invert()
MAX_INV_ITER = 200

_EPS = np.finfo(float).eps


def _falling(p: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= p - i
    return out


def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, (arr.ndim == 0)


class PhiFunction:
    """A catalog rate function with analytic derivatives and metadata.

    Instances are immutable by convention; all state set in ``__init__`` is
    never mutated afterwards, so sharing across threads and distributions is
    safe.
    """

    def __init__(
        self,
        kind: str,
        params: tuple,
        spec_id: str,
        eval_fn,
        jet_fn,
        deriv1_fn,
        deriv2_fn,
        domain_sup: float,
        limit: float,
        vanishes_at_zero: bool,
        flags: frozenset,
        nondecreasing: bool,
        log_eval_fn=None,
        closed_form_log_product=None,
        inverse_factory=None,
    ):
        self.kind = kind
        self.params = params
        self.spec_id = spec_id
        self._eval = eval_fn
        self._jet = jet_fn
        self._d1 = deriv1_fn
        self._d2 = deriv2_fn
        self.domain_sup = float(domain_sup)
        self.limit = float(limit)
        self.bounded = math.isfinite(limit)
        self.vanishes_at_zero = vanishes_at_zero
        self.flags = frozenset(flags)
        self.nondecreasing = nondecreasing
        self._log_eval = log_eval_fn
        self.closed_form_log_product = closed_form_log_product
        self._inverse_factory = inverse_factory

    # -- evaluation ---------------------------------------------------------

    def _check_domain(self, arr):
        if np.any(arr <= 0.0) or np.any(arr >= self.domain_sup):
            raise DomainError(
                f"{self.spec_id}: argument outside domain (0, {self.domain_sup})"
            )

    def __call__(self, x):
        arr, scalar = _as_float_array(x)
        self._check_domain(arr)
        out = self._eval(arr)
        return float(out) if scalar else out

    def log_eval(self, x):
        arr, scalar = _as_float_array(x)
        self._check_domain(arr)
        out = self._log_eval(arr) if self._log_eval is not None else np.log(self._eval(arr))
        return float(out) if scalar else out

    def deriv1(self, x):
        arr, scalar = _as_float_array(x)
        self._check_domain(arr)
        out = self._d1(arr)
        return float(out) if scalar else out

    def deriv2(self, x):
        arr, scalar = _as_float_array(x)
        self._check_domain(arr)
        out = self._d2(arr)
        return float(out) if scalar else out

    def derivatives(self, x: float, n: int) -> list[float]:
        """Jet [f(x), f'(x), ..., f^(n)(x)] at a scalar point."""
        if n < 0 or n > MAX_BELL_ORDER:
            raise UnsupportedOrderError(
                f"derivative order {n} outside supported range 0..{MAX_BELL_ORDER}"
            )
        x = float(x)
        if not (0.0 < x < self.domain_sup):
            raise DomainError(f"{self.spec_id}: {x} outside domain (0, {self.domain_sup})")
        return self._jet(x, n)

    # -- structure ----------------------------------------------------------

    def integer_tail_inf(self, n: int) -> float:
        """A lower bound for inf over integer m >= n of phi(m)."""
        if self.nondecreasing:
            return self._eval(np.asarray(float(n)))[()] if n < self.domain_sup else self.limit
        return self.limit

    def inverse(self) -> "PhiFunction":
        """The paired compositional inverse, when the catalog provides one."""
        if self._inverse_factory is None:
            raise DomainError(f"{self.spec_id}: no cataloged compositional inverse")
        return self._inverse_factory()

    def __repr__(self):
        return f"PhiFunction({self.spec_id!r})"

    def __eq__(self, other):
        return isinstance(other, PhiFunction) and other.spec_id == self.spec_id

    def __hash__(self):
        return hash(self.spec_id)


# -- root finding -----------------------------------------------------------


def _invert_monotone(eval_fn, s, domain_sup, deriv_fn=None,
                     tol: float = TOL_INV, max_iter: int = MAX_INV_ITER):
    """Solve eval_fn(x) = s for increasing eval_fn on (0, domain_sup).

    Doubling/halving bracket expansion, then Newton steps safeguarded by the
    bracket with bisection fallback.  Vectorized over s.
    """
    s = np.asarray(s, dtype=float)
    shape = s.shape
    flat = s.ravel()

    finite_dom = math.isfinite(domain_sup)
    start = domain_sup / 2.0 if finite_dom else 1.0

    lo = np.full(flat.shape, start)
    for _ in range(max_iter):
        mask = eval_fn(lo) > flat
        if not mask.any():
            break
        lo[mask] *= 0.5
    else:
        raise ConvergenceError("bracket expansion (lower) did not terminate")

    hi = np.full(flat.shape, start)
    for _ in range(max_iter):
        mask = eval_fn(hi) < flat
        if not mask.any():
            break
        if finite_dom:
            hi[mask] = domain_sup - 0.5 * (domain_sup - hi[mask])
        else:
            hi[mask] *= 2.0
    else:
        raise ConvergenceError("bracket expansion (upper) did not terminate")

    x = 0.5 * (lo + hi)
    done = np.zeros(flat.shape, dtype=bool)
    for _ in range(max_iter):
        fx = eval_fn(x) - flat
        done |= np.abs(fx) <= tol
        # double-precision floor: accept once the bracket is a few ulps wide
        done |= (hi - lo) <= 4.0 * _EPS * np.maximum(1.0, np.abs(x))
        if done.all():
            break
        neg = fx <= 0.0
        lo = np.where(neg & ~done, x, lo)
        hi = np.where(~neg & ~done, x, hi)
        if deriv_fn is not None:
            with np.errstate(all="ignore"):
                xn = x - fx / deriv_fn(x)
            bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
            x = np.where(done, x, np.where(bad, 0.5 * (lo + hi), xn))
        else:
            x = np.where(done, x, 0.5 * (lo + hi))
    else:
        raise ConvergenceError(
            f"invert: residual above {tol} after {max_iter} iterations"
        )
    return x.reshape(shape)


def invert(f: PhiFunction, s, tol: float = TOL_INV, max_iter: int = MAX_INV_ITER):
    """Value h(s) of the compositional inverse: the root of f(x) = s.

    Requires f increasing with f(0+) = 0; s must lie in (0, lim f).
    """
    if not f.vanishes_at_zero:
        raise DomainError(f"{f.spec_id}: inversion requires lim at 0+ to vanish")
    arr, scalar = _as_float_array(s)
    if np.any(arr <= 0.0) or np.any(arr >= f.limit):
        raise DomainError(f"{f.spec_id}: inversion target outside (0, {f.limit})")
    root = _invert_monotone(
        lambda x: f._eval(x), arr, f.domain_sup, deriv_fn=lambda x: f._d1(x),
        tol=tol, max_iter=max_iter,
    )
    return float(root) if scalar else root


def inverse_derivative(f: PhiFunction, s: float, n: int) -> float:
    """n-th derivative of the inverse of f at s, via weighted Bell polynomials.

    With h = f^{-1} and the jet of f at h(s),

        h^(n)(s) = f'(h)^-(2n-1) * C_{2n-2, n-1}(f'(h), -f''(h), ..., -f^(n)(h)),

    which reduces to 1/f'(h(s)) at n = 1.
    """
    if n < 1 or n > MAX_BELL_ORDER:
        raise UnsupportedOrderError(f"inverse derivative order {n} not in 1..{MAX_BELL_ORDER}")
    h = invert(f, float(s))
    jet = f.derivatives(h, n)
    fp = jet[1]
    if fp == 0.0:
        raise DomainError(f"{f.spec_id}: vanishing first derivative at {h}")
    if n == 1:
        return 1.0 / fp
    xs = [fp] + [-jet[i] for i in range(2, n + 1)]
    return fp ** (-(2 * n - 1)) * weighted_bell(2 * n - 2, n - 1, xs)


# -- curvature checks -------------------------------------------------------


@dataclass(frozen=True)
class CurvatureReport:
    """Per-point signs of a curvature functional over a grid."""

    quantity: str
    points: tuple
    values: tuple
    classification: str
    tolerance: float

    def holds(self) -> bool:
        return self.classification in ("exp-concave", "log-convex")


def check_exp_concavity(f: PhiFunction, grid, tol: float = 1e-9) -> CurvatureReport:
    """Sign of (e^f)'' / e^f = f'' + (f')^2 over the grid.

    All <= tol: exp-concave; all >= -tol: exp-convex; otherwise mixed.
    Points within the band count for both weak inequalities.
    """
    pts = np.asarray(grid, dtype=float)
    if pts.ndim != 1 or pts.size == 0:
        raise ConfigError("grid must be a nonempty 1-d array")
    q = f.deriv2(pts) + f.deriv1(pts) ** 2
    if np.all(q <= tol):
        cls = "exp-concave"
    elif np.all(q >= -tol):
        cls = "exp-convex"
    else:
        cls = "mixed"
    return CurvatureReport("f'' + (f')^2", tuple(pts.tolist()), tuple(q.tolist()), cls, tol)


def check_eventual_log_convexity(h: PhiFunction, m: float, grid,
                                 tol: float = 1e-9) -> CurvatureReport:
    """Sign of h''*h - (h')^2 (log-convexity of h) on a grid right of m."""
    pts = np.asarray(grid, dtype=float)
    if pts.ndim != 1 or pts.size == 0:
        raise ConfigError("grid must be a nonempty 1-d array")
    if np.any(pts <= m):
        raise DomainError(f"log-convexity grid must lie strictly right of m={m}")
    vals = h.deriv2(pts) * h(pts) - h.deriv1(pts) ** 2
    cls = "log-convex" if np.all(vals >= -tol) else "not-log-convex"
    return CurvatureReport("h''h - (h')^2", tuple(pts.tolist()), tuple(vals.tolist()), cls, tol)


# -- catalog construction ---------------------------------------------------


def _fmt_param(v: float) -> str:
    return f"{v:.1f}" if float(v) == int(v) and abs(v) < 1e6 else repr(float(v))


def _jet_from_inner_inverse(inner: PhiFunction, value: float, n: int) -> list[float]:
    """Jet of the inverse of ``inner`` at a point whose inverse value is known.

    ``value`` = inner^{-1}(x); derivative orders come from the weighted
    Bell-polynomial inverse formula applied to the jet of ``inner`` at
    ``value``.
    """
    jet_m = inner.derivatives(value, n)
    out = [value]
    for order in range(1, n + 1):
        fp = jet_m[1]
        if order == 1:
            out.append(1.0 / fp)
            continue
        xs = [fp] + [-jet_m[i] for i in range(2, order + 1)]
        out.append(fp ** (-(2 * order - 1)) * weighted_bell(2 * order - 2, order - 1, xs))
    return out


def _make_inverse_side(forward: PhiFunction, kind: str, eval_fn, deriv1_fn,
                       deriv2_fn, log_eval_fn=None) -> PhiFunction:
    """Closed-form inverse h of a cataloged pair; jets route through forward."""
    flags = {"IBF"}
    if "SBF" in forward.flags:
        flags.add("ISBF")

    def jet(x: float, n: int) -> list[float]:
        val = eval_fn(np.asarray(x, dtype=float))[()]
        return _jet_from_inner_inverse(forward, float(val), n)

    return PhiFunction(
        kind=kind,
        params=forward.params,
        spec_id=f"inv:{forward.spec_id}",
        eval_fn=eval_fn,
        jet_fn=jet,
        deriv1_fn=deriv1_fn,
        deriv2_fn=deriv2_fn,
        domain_sup=forward.limit,
        limit=forward.domain_sup,
        vanishes_at_zero=True,
        flags=frozenset(flags),
        nondecreasing=True,
        log_eval_fn=log_eval_fn,
        inverse_factory=lambda: forward,
    )


def _reciprocal_jet(dvals: list[float], n: int) -> list[float]:
    # jet of 1/u given jet of u, via Faa di Bruno with outer (1/u)^(k)
    u0 = dvals[0]
    return compose_derivatives(
        lambda k: (-1.0) ** k * math.factorial(k) * u0 ** (-(k + 1)),
        dvals, n,
    )


def _make_identity() -> PhiFunction:
    def jet(x, n):
        return [x, 1.0] + [0.0] * max(0, n - 1) if n >= 1 else [x]

    f = PhiFunction(
        kind="id", params=(), spec_id="id",
        eval_fn=lambda x: x + 0.0,
        jet_fn=jet,
        deriv1_fn=lambda x: np.ones_like(x),
        deriv2_fn=lambda x: np.zeros_like(x),
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset({"BF", "BF0", "CBF", "SBF", "IBF", "ISBF"}),
        nondecreasing=True,
        log_eval_fn=np.log,
        closed_form_log_product=lambda n: math.lgamma(n + 1.0),
    )
    f._inverse_factory = lambda: f
    return f


def _make_power(delta: float) -> PhiFunction:
    if delta <= 0:
        raise ConfigError(f"power exponent must be positive, got {delta}")
    sid = f"power:{_fmt_param(delta)}"

    def jet(x, n):
        out = [x ** delta]
        for k in range(1, n + 1):
            out.append(_falling(delta, k) * x ** (delta - k))
        return out

    if delta < 1.0:
        flags = {"BF", "BF0", "CBF", "SBF"}
    elif delta == 1.0:
        flags = {"BF", "BF0", "CBF", "SBF", "IBF", "ISBF"}
    else:
        flags = {"IBF", "ISBF"}
    return PhiFunction(
        kind="power", params=(delta,), spec_id=sid,
        eval_fn=lambda x: x ** delta,
        jet_fn=jet,
        deriv1_fn=lambda x: delta * x ** (delta - 1.0),
        deriv2_fn=lambda x: delta * (delta - 1.0) * x ** (delta - 2.0),
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset(flags), nondecreasing=True,
        log_eval_fn=lambda x: delta * np.log(x),
        closed_form_log_product=lambda n: delta * math.lgamma(n + 1.0),
        inverse_factory=lambda: _make_power(1.0 / delta),
    )


def _make_ratio(a: float) -> PhiFunction:
    if a <= 0:
        raise ConfigError(f"ratio scale must be positive, got {a}")
    sid = f"ratio:{_fmt_param(a)}"

    def jet(x, n):
        out = [a * x / (1.0 + x)]
        for k in range(1, n + 1):
            out.append(a * (-1.0) ** (k - 1) * math.factorial(k) * (1.0 + x) ** (-(k + 1)))
        return out

    f = PhiFunction(
        kind="ratio", params=(a,), spec_id=sid,
        eval_fn=lambda x: a * x / (1.0 + x),
        jet_fn=jet,
        deriv1_fn=lambda x: a / (1.0 + x) ** 2,
        deriv2_fn=lambda x: -2.0 * a / (1.0 + x) ** 3,
        domain_sup=np.inf, limit=a, vanishes_at_zero=True,
        flags=frozenset({"BF", "BF0", "CBF", "SBF"}), nondecreasing=True,
        log_eval_fn=lambda x: math.log(a) + np.log(x) - np.log1p(x),
        closed_form_log_product=lambda n: n * math.log(a) - math.log(n + 1.0),
    )
    f._inverse_factory = lambda: _make_inverse_side(
        f, "inv-ratio",
        eval_fn=lambda s: s / (a - s),
        deriv1_fn=lambda s: a / (a - s) ** 2,
        deriv2_fn=lambda s: 2.0 * a / (a - s) ** 3,
        log_eval_fn=lambda s: np.log(s) - np.log(a - s),
    )
    return f


def _make_shiftedpower(alpha: float) -> PhiFunction:
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"shiftedpower exponent must be in (0, 1], got {alpha}")
    sid = f"shiftedpower:{_fmt_param(alpha)}"

    def jet(x, n):
        out = [(1.0 + x) ** alpha - 1.0]
        for k in range(1, n + 1):
            out.append(_falling(alpha, k) * (1.0 + x) ** (alpha - k))
        return out

    inv_exp = 1.0 / alpha
    f = PhiFunction(
        kind="shiftedpower", params=(alpha,), spec_id=sid,
        eval_fn=lambda x: np.expm1(alpha * np.log1p(x)),
        jet_fn=jet,
        deriv1_fn=lambda x: alpha * (1.0 + x) ** (alpha - 1.0),
        deriv2_fn=lambda x: alpha * (alpha - 1.0) * (1.0 + x) ** (alpha - 2.0),
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset({"BF", "BF0", "CBF", "SBF"}), nondecreasing=True,
    )
    f._inverse_factory = lambda: _make_inverse_side(
        f, "inv-shiftedpower",
        eval_fn=lambda s: np.expm1(inv_exp * np.log1p(s)),
        deriv1_fn=lambda s: inv_exp * (1.0 + s) ** (inv_exp - 1.0),
        deriv2_fn=lambda s: inv_exp * (inv_exp - 1.0) * (1.0 + s) ** (inv_exp - 2.0),
    )
    return f


def _make_sqrtratio(a: float) -> PhiFunction:
    if a <= 0:
        raise ConfigError(f"sqrtratio scale must be positive, got {a}")
    sid = f"sqrtratio:{_fmt_param(a)}"
    ra = math.sqrt(a)

    def inner_jet(x, n):
        # g = x/(1+x)
        out = [x / (1.0 + x)]
        for k in range(1, n + 1):
            out.append((-1.0) ** (k - 1) * math.factorial(k) * (1.0 + x) ** (-(k + 1)))
        return out

    def jet(x, n):
        g = inner_jet(x, n)
        u0 = g[0]
        return compose_derivatives(
            lambda k: ra * _falling(0.5, k) * u0 ** (0.5 - k), g, n
        )

    def d1(x):
        fx = ra * np.sqrt(x / (1.0 + x))
        return fx / (2.0 * x * (1.0 + x))

    def d2(x):
        fx = ra * np.sqrt(x / (1.0 + x))
        u = 2.0 * x * (1.0 + x)
        return fx * (1.0 - (4.0 * x + 2.0)) / u ** 2

    f = PhiFunction(
        kind="sqrtratio", params=(a,), spec_id=sid,
        eval_fn=lambda x: ra * np.sqrt(x / (1.0 + x)),
        jet_fn=jet,
        deriv1_fn=d1,
        deriv2_fn=d2,
        domain_sup=np.inf, limit=ra, vanishes_at_zero=True,
        flags=frozenset({"BF", "BF0", "CBF", "SBF"}), nondecreasing=True,
        log_eval_fn=lambda x: 0.5 * (math.log(a) + np.log(x) - np.log1p(x)),
        closed_form_log_product=lambda n: 0.5 * (n * math.log(a) - math.log(n + 1.0)),
    )
    f._inverse_factory = lambda: _make_inverse_side(
        f, "inv-sqrtratio",
        eval_fn=lambda s: s * s / (a - s * s),
        deriv1_fn=lambda s: 2.0 * a * s / (a - s * s) ** 2,
        deriv2_fn=lambda s: (2.0 * a * (a + 3.0 * s * s)) / (a - s * s) ** 3,
    )
    return f


def _make_explinear() -> PhiFunction:
    sid = "explinear"

    def jet(x, n):
        e = math.exp(x)
        return [(x + k) * e if k else x * e for k in range(n + 1)]

    f = PhiFunction(
        kind="explinear", params=(), spec_id=sid,
        eval_fn=lambda s: s * np.exp(s),
        jet_fn=jet,
        deriv1_fn=lambda s: (1.0 + s) * np.exp(s),
        deriv2_fn=lambda s: (2.0 + s) * np.exp(s),
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset({"IBF", "ISBF"}), nondecreasing=True,
        log_eval_fn=lambda s: np.log(s) + s,
        inverse_factory=_make_lambert,
    )
    return f


def _make_lambert() -> PhiFunction:
    """Principal Lambert branch on (0, inf), evaluated by numeric inversion
    of s*e^s (no closed form is used anywhere in the evaluation path)."""
    inner = _make_explinear()

    def ev(x):
        return _invert_monotone(
            lambda y: y * np.exp(y), x, np.inf,
            deriv_fn=lambda y: (1.0 + y) * np.exp(y),
        )

    def d1(x):
        w = ev(x)
        return w / (x * (1.0 + w))

    def d2(x):
        w = ev(x)
        # second derivative of the inverse of m(y)=y e^y: -m''(w)/m'(w)^3
        e = np.exp(w)
        return -(2.0 + w) * e / ((1.0 + w) * e) ** 3

    def jet(x, n):
        w = float(ev(np.asarray(x, dtype=float))[()])
        return _jet_from_inner_inverse(inner, w, n)

    return PhiFunction(
        kind="lambert", params=(), spec_id="lambert",
        eval_fn=ev,
        jet_fn=jet,
        deriv1_fn=d1,
        deriv2_fn=d2,
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset({"BF", "BF0", "SBF"}), nondecreasing=True,
        inverse_factory=_make_explinear,
    )


def _make_logpower(alpha: float) -> PhiFunction:
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"logpower exponent must be in (0, 1], got {alpha}")
    sid = f"logpower:{_fmt_param(alpha)}"
    inv_exp = 1.0 / alpha

    def jet(x, n):
        w = [x ** alpha]
        for k in range(1, n + 1):
            w.append(_falling(alpha, k) * x ** (alpha - k))
        u0 = w[0]
        return compose_derivatives(
            lambda k: math.log1p(u0) if k == 0
            else (-1.0) ** (k - 1) * math.factorial(k - 1) * (1.0 + u0) ** (-k),
            w, n,
        )

    f = PhiFunction(
        kind="logpower", params=(alpha,), spec_id=sid,
        eval_fn=lambda x: np.log1p(x ** alpha),
        jet_fn=jet,
        deriv1_fn=lambda x: alpha * x ** (alpha - 1.0) / (1.0 + x ** alpha),
        deriv2_fn=lambda x: alpha * x ** (alpha - 2.0)
        * ((alpha - 1.0) - x ** alpha) / (1.0 + x ** alpha) ** 2,
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset({"BF", "BF0", "CBF", "SBF"}), nondecreasing=True,
    )
    f._inverse_factory = lambda: _make_inverse_side(
        f, "inv-logpower",
        eval_fn=lambda s: np.expm1(s) ** inv_exp,
        deriv1_fn=lambda s: inv_exp * np.expm1(s) ** (inv_exp - 1.0) * np.exp(s),
        deriv2_fn=lambda s: inv_exp * np.exp(s) * np.expm1(s) ** (inv_exp - 2.0)
        * ((inv_exp - 1.0) * np.exp(s) + np.expm1(s)),
    )
    return f


def _tanh_poly_chain(max_order: int) -> list[np.ndarray]:
    # p_k with d^k/dt^k log cosh t = p_k(tanh t); p_{k+1} = p_k'(T) (1 - T^2)
    polys = [np.array([0.0, 1.0])]  # T
    for _ in range(max_order - 1):
        c = polys[-1]
        dc = c[1:] * np.arange(1, len(c))
        nxt = np.concatenate([dc, [0.0, 0.0]]) - np.concatenate([[0.0, 0.0], dc])
        polys.append(nxt)
    return polys


_LOGCOSH_POLYS = _tanh_poly_chain(MAX_BELL_ORDER + 2)


def _polyval_ascending(c: np.ndarray, t: float) -> float:
    out = 0.0
    for coef in c[::-1]:
        out = out * t + coef
    return out


def _make_logcosh() -> PhiFunction:
    sid = "logcosh"

    def stable_logcosh(t):
        # log cosh t = t + log1p(e^{-2t}) - log 2, stable for large t
        return t + np.log1p(np.exp(-2.0 * t)) - math.log(2.0)

    def ev(x):
        return stable_logcosh(np.sqrt(2.0 * x))

    def jet(x, n):
        t0 = math.sqrt(2.0 * x)
        inner = [t0]
        for k in range(1, n + 1):
            inner.append(math.sqrt(2.0) * _falling(0.5, k) * x ** (0.5 - k))
        T = math.tanh(t0)

        def outer_at(k):
            if k == 0:
                return float(stable_logcosh(np.asarray(t0))[()])
            return _polyval_ascending(_LOGCOSH_POLYS[k - 1], T)

        return compose_derivatives(outer_at, inner, n)

    def d1(x):
        t = np.sqrt(2.0 * x)
        return np.tanh(t) / t

    def d2(x):
        t = np.sqrt(2.0 * x)
        sech2 = 1.0 - np.tanh(t) ** 2
        return sech2 / t ** 2 - np.tanh(t) / t ** 3

    def inv_eval(s):
        # t = arcosh(e^s) computed stably, h = t^2/2
        t = s + np.log1p(np.sqrt(-np.expm1(-2.0 * s)))
        return 0.5 * t * t

    def inv_d1(s):
        t = s + np.log1p(np.sqrt(-np.expm1(-2.0 * s)))
        # dt/ds = e^s/sqrt(e^{2s}-1) = 1/sqrt(1-e^{-2s})
        return t / np.sqrt(-np.expm1(-2.0 * s))

    def inv_d2(s):
        r = -np.expm1(-2.0 * s)          # 1 - e^{-2s}
        t = s + np.log1p(np.sqrt(r))
        dt = 1.0 / np.sqrt(r)
        d2t = -np.exp(-2.0 * s) * r ** (-1.5)
        return dt * dt + t * d2t

    f = PhiFunction(
        kind="logcosh", params=(), spec_id=sid,
        eval_fn=ev,
        jet_fn=jet,
        deriv1_fn=d1,
        deriv2_fn=d2,
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset({"BF", "BF0", "CBF", "SBF"}), nondecreasing=True,
    )
    f._inverse_factory = lambda: _make_inverse_side(
        f, "inv-logcosh",
        eval_fn=inv_eval, deriv1_fn=inv_d1, deriv2_fn=inv_d2,
    )
    return f


def _make_logshift(a: float) -> PhiFunction:
    if a <= 0:
        raise ConfigError(f"logshift scale must be positive, got {a}")
    sid = f"logshift:{_fmt_param(a)}"

    def jet(x, n):
        out = [math.log1p(x / a)]
        for k in range(1, n + 1):
            out.append((-1.0) ** (k - 1) * math.factorial(k - 1) * (a + x) ** (-k))
        return out

    f = PhiFunction(
        kind="logshift", params=(a,), spec_id=sid,
        eval_fn=lambda x: np.log1p(x / a),
        jet_fn=jet,
        deriv1_fn=lambda x: 1.0 / (a + x),
        deriv2_fn=lambda x: -1.0 / (a + x) ** 2,
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset({"BF", "BF0", "CBF", "SBF"}), nondecreasing=True,
    )
    f._inverse_factory = lambda: _make_inverse_side(
        f, "inv-logshift",
        eval_fn=lambda s: a * np.expm1(s),
        deriv1_fn=lambda s: a * np.exp(s),
        deriv2_fn=lambda s: a * np.exp(s),
        log_eval_fn=lambda s: math.log(a) + np.log(np.expm1(s)),
    )
    return f


def _make_rationalshift(a: float, b: float) -> PhiFunction:
    if a <= 0 or b <= 0:
        raise ConfigError(f"rationalshift parameters must be positive, got {a}, {b}")
    sid = f"rationalshift:{_fmt_param(a)},{_fmt_param(b)}"

    def jet(x, n):
        out = [(x + a) / (x + b)]
        for k in range(1, n + 1):
            out.append((a - b) * (-1.0) ** k * math.factorial(k) * (x + b) ** (-(k + 1)))
        return out

    def clp(n):
        # prod_{k=1}^{n} (k+a)/(k+b) = (a+1)_n / (b+1)_n
        return (math.lgamma(a + 1.0 + n) - math.lgamma(a + 1.0)
                - math.lgamma(b + 1.0 + n) + math.lgamma(b + 1.0))

    flags = {"BF", "CBF", "SBF"} if a <= b else set()
    return PhiFunction(
        kind="rationalshift", params=(a, b), spec_id=sid,
        eval_fn=lambda x: (x + a) / (x + b),
        jet_fn=jet,
        deriv1_fn=lambda x: (b - a) / (x + b) ** 2,
        deriv2_fn=lambda x: -2.0 * (b - a) / (x + b) ** 3,
        domain_sup=np.inf, limit=1.0, vanishes_at_zero=False,
        flags=frozenset(flags), nondecreasing=(a <= b),
        closed_form_log_product=clp,
    )


def _make_ratioquadratic() -> PhiFunction:
    sid = "ratioquadratic"

    def jet(x, n):
        # f = 1 + 2x/D with D = x^2 - x + 1
        D = [x * x - x + 1.0, 2.0 * x - 1.0, 2.0] + [0.0] * max(0, n - 2)
        u = _reciprocal_jet(D[: n + 1], n)
        out = [1.0 + 2.0 * x * u[0]]
        for k in range(1, n + 1):
            out.append(2.0 * (x * u[k] + k * u[k - 1]))
        return out

    def d1(x):
        D = x * x - x + 1.0
        return 2.0 * (1.0 - x * x) / D ** 2

    def d2(x):
        D = x * x - x + 1.0
        return 4.0 * (x ** 3 - 3.0 * x + 1.0) / D ** 3

    return PhiFunction(
        kind="ratioquadratic", params=(), spec_id=sid,
        eval_fn=lambda x: (x * x + x + 1.0) / (x * x - x + 1.0),
        jet_fn=jet,
        deriv1_fn=d1,
        deriv2_fn=d2,
        domain_sup=np.inf, limit=1.0, vanishes_at_zero=False,
        flags=frozenset(), nondecreasing=False,
        closed_form_log_product=lambda n: math.log(n * n + n + 1.0),
    )


def _make_quadraticshift() -> PhiFunction:
    sid = "quadraticshift"

    def jet(x, n):
        return [x * (x + 2.0), 2.0 * x + 2.0, 2.0][: n + 1] + [0.0] * max(0, n - 2)

    def clp(n):
        # prod_{k=1}^{n} k(k+2) = n! (n+2)!/2
        return math.lgamma(n + 1.0) + math.lgamma(n + 3.0) - math.log(2.0)

    return PhiFunction(
        kind="quadraticshift", params=(), spec_id=sid,
        eval_fn=lambda x: x * (x + 2.0),
        jet_fn=jet,
        deriv1_fn=lambda x: 2.0 * x + 2.0,
        deriv2_fn=lambda x: 2.0 * np.ones_like(x),
        domain_sup=np.inf, limit=np.inf, vanishes_at_zero=True,
        flags=frozenset({"IBF", "ISBF"}), nondecreasing=True,
        closed_form_log_product=clp,
        inverse_factory=lambda: _make_shiftedpower(0.5),
    )


def make_numeric_inverse(inner: PhiFunction) -> PhiFunction:
    """Numeric compositional inverse of a vanishing increasing catalog entry."""
    if "BF0" not in inner.flags:
        raise ConfigError(
            f"numeric inversion requires a BF0-flagged entry, got {inner.spec_id}"
        )

    def ev(x):
        return _invert_monotone(
            lambda y: inner._eval(y), x, inner.domain_sup,
            deriv_fn=lambda y: inner._d1(y),
        )

    def d1(x):
        v = ev(x)
        return 1.0 / inner._d1(v)

    def d2(x):
        v = ev(x)
        return -inner._d2(v) / inner._d1(v) ** 3

    def jet(x, n):
        v = float(ev(np.asarray(x, dtype=float))[()])
        return _jet_from_inner_inverse(inner, v, n)

    flags = {"IBF"}
    if "SBF" in inner.flags:
        flags.add("ISBF")
    return PhiFunction(
        kind="numinv", params=(inner.spec_id,), spec_id=f"numinv:{inner.spec_id}",
        eval_fn=ev,
        jet_fn=jet,
        deriv1_fn=d1,
        deriv2_fn=d2,
        domain_sup=inner.limit, limit=inner.domain_sup,
        vanishes_at_zero=True,
        flags=frozenset(flags), nondecreasing=True,
        inverse_factory=lambda: inner,
    )


# -- registry / parsing -----------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    kind: str
    signature: str
    summary: str
    example: str
    factory: object = field(repr=False)


_CATALOG: list[CatalogEntry] = [
    CatalogEntry("id", "id", "identity rate", "id", lambda: _make_identity()),
    CatalogEntry("power", "power:<delta>", "x^delta (delta > 0)", "power:0.5",
                 lambda d: _make_power(d)),
    CatalogEntry("ratio", "ratio:<a>", "a*x/(x+1), bounded by a", "ratio:1.0",
                 lambda a: _make_ratio(a)),
    CatalogEntry("shiftedpower", "shiftedpower:<alpha>", "(1+x)^alpha - 1, alpha in (0,1]",
                 "shiftedpower:0.5", lambda a: _make_shiftedpower(a)),
    CatalogEntry("sqrtratio", "sqrtratio:<a>", "sqrt(a*x/(x+1)), bounded by sqrt(a)",
                 "sqrtratio:2.0", lambda a: _make_sqrtratio(a)),
    CatalogEntry("lambert", "lambert", "principal Lambert branch (numeric inverse of s*e^s)",
                 "lambert", lambda: _make_lambert()),
    CatalogEntry("explinear", "explinear", "s*e^s (inverse of lambert)", "explinear",
                 lambda: _make_explinear()),
    CatalogEntry("logpower", "logpower:<alpha>", "log(1 + x^alpha), alpha in (0,1]",
                 "logpower:0.5", lambda a: _make_logpower(a)),
    CatalogEntry("logcosh", "logcosh", "log cosh sqrt(2x)", "logcosh",
                 lambda: _make_logcosh()),
    CatalogEntry("logshift", "logshift:<a>", "log(1 + x/a)", "logshift:1.0",
                 lambda a: _make_logshift(a)),
    CatalogEntry("rationalshift", "rationalshift:<a>,<b>", "(x+a)/(x+b), limit 1",
                 "rationalshift:2.0,1.0", lambda a, b: _make_rationalshift(a, b)),
    CatalogEntry("ratioquadratic", "ratioquadratic", "(x^2+x+1)/(x^2-x+1), limit 1",
                 "ratioquadratic", lambda: _make_ratioquadratic()),
    CatalogEntry("quadraticshift", "quadraticshift", "x(x+2)", "quadraticshift",
                 lambda: _make_quadraticshift()),
]

_BY_KIND = {e.kind: e for e in _CATALOG}
_ALIASES = {"identity": "id"}


def catalog_entries() -> list[CatalogEntry]:
    return list(_CATALOG)


def parse_phi(spec_id: str) -> PhiFunction:
    """Build a PhiFunction from its string id.

    Grammar: ``<kind>[:<param>[,<param>]]`` with the modifiers
    ``inv:<id>`` (cataloged closed-form inverse) and ``numinv:<id>``
    (numeric inverse of a BF0 entry).
    """
    if not isinstance(spec_id, str) or not spec_id:
        raise ConfigError("phi id must be a nonempty string")
    text = spec_id.strip()
    if text.startswith("inv:"):
        return parse_phi(text[4:]).inverse()
    if text.startswith("numinv:"):
        return make_numeric_inverse(parse_phi(text[7:]))
    head, _, rest = text.partition(":")
    head = _ALIASES.get(head, head)
    entry = _BY_KIND.get(head)
    if entry is None:
        known = ", ".join(sorted(_BY_KIND))
        raise ConfigError(f"unknown phi kind {head!r} (known: {known}, inv:, numinv:)")
    if rest:
        try:
            params = tuple(float(p) for p in rest.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad parameters in {spec_id!r}: {exc}") from None
    else:
        params = ()
    try:
        return entry.factory(*params)
    except TypeError:
        raise ConfigError(
            f"wrong parameter count for {head!r}: expected {entry.signature!r}"
        ) from None
