"""Convex divergence generators.

A generator is a convex ``f: [0, inf) -> R`` with ``f(1) = 0``.  Besides the
function itself we carry the two boundary limits needed to give meaning to
``r * f(p / r)`` when ``p`` or ``r`` vanishes:

* ``at_zero``            f(0) = lim_{u -> 0} f(u)
* ``slope_at_infinity``  f'(inf) = lim_{u -> inf} f(u) / u

Infinite values are plain ``math.inf``; ``-inf`` never occurs for the
built-in generators.

All built-in functions are numpy-vectorized.  User generators built with
:meth:`Generator.from_function` may be scalar-only and are wrapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import xlogy

from .errors import DomainError, GeneratorDefinitionError

__all__ = [
    "Generator",
    "NormalizedGenerator",
    "boundary_limits",
    "builtin_generator",
    "check_convexity",
    "chi_square",
    "eval_generator",
    "hellinger",
    "kl",
    "level_threshold",
    "lower_level_threshold",
    "normalize",
    "subgradient",
    "total_variation",
    "tsallis_generator",
]

# bisection stops once the bracket is this narrow (absolute, on u)
THRESHOLD_TOL = 1e-12
# level_threshold gives up and answers +inf beyond this u
THRESHOLD_CAP = 1e18

_DIFF_STEP = 1e-7
_NORMAL_MIN = np.finfo(float).tiny


def _default_log_perspective(gen, log_p, log_r):
    """Generic ``r f(p/r)`` from log masses; only used when r underflows."""
    u = np.exp(log_p - log_r)
    r = np.exp(log_r)
    out = np.empty_like(u)
    big = ~np.isfinite(u)
    out[big] = np.exp(log_p[big]) * gen.slope_at_infinity
    out[~big] = r[~big] * gen.func(u[~big])
    return out


@dataclass(frozen=True)
class Generator:
    """A convex generator together with its boundary data.

    ``derivative`` returns the one-sided derivatives ``(left, right)`` at a
    positive ``u``; when absent, difference quotients are used.
    ``log_perspective(log_p, log_r)`` evaluates ``r f(p/r)`` without forming
    ``p`` or ``r`` explicitly and is what keeps extreme cells finite.
    """

    name: str
    func: Callable
    at_zero: float
    slope_at_infinity: float
    subgradient_at_one: tuple
    derivative: Optional[Callable] = field(default=None, compare=False, repr=False)
    log_perspective: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        one = float(np.asarray(self.func(np.array([1.0])))[0])
        if one != 0.0:
            raise GeneratorDefinitionError(
                f"generator {self.name!r} has f(1) = {one!r}, expected exactly 0"
            )
        left, right = self.subgradient_at_one
        if not left <= right:
            raise GeneratorDefinitionError(
                f"generator {self.name!r}: subgradient interval [{left}, {right}] is empty"
            )

    @classmethod
    def from_function(cls, func, name, at_zero=None, slope_at_infinity=None,
                      vectorized=False):
        """Wrap a user-supplied convex function.

        Missing boundary limits are estimated from the geometric grids used
        by :func:`boundary_limits`; supplied ones are cross-checked there.
        """
        if vectorized:
            vfunc = func
        else:
            scalar = func

            def vfunc(u):
                arr = np.asarray(u, dtype=float)
                flat = [float(scalar(float(x))) for x in arr.ravel()]
                return np.asarray(flat, dtype=float).reshape(arr.shape)

        def scalar_f(u):
            return float(np.asarray(vfunc(np.array([u])))[0])

        if at_zero is None:
            at_zero = _extrapolate([scalar_f(2.0 ** -k) for k in range(1, 41)])
        if slope_at_infinity is None:
            slope_at_infinity = _extrapolate(
                [scalar_f(2.0 ** k) / 2.0 ** k for k in range(1, 41)]
            )
        sub = _numeric_subgradient(scalar_f, 1.0)
        gen = cls(name, vfunc, float(at_zero), float(slope_at_infinity), sub)
        boundary_limits(gen)
        return gen

    def __call__(self, u):
        return eval_generator(self, u)

    def perspective(self, p, r, log_p=None, log_r=None):
        """Vectorized ``r * f(p / r)`` with the boundary conventions.

        ``0 f(0/0) = 0``, ``0 f(a/0) = a f'(inf)`` and ``r f(0/r) = r f(0)``.
        Pass ``log_p``/``log_r`` when the masses may have underflowed; a mass
        that is 0.0 in floating point but has a finite log is treated as
        positive.
        """
        p = np.atleast_1d(np.asarray(p, dtype=float))
        r = np.atleast_1d(np.asarray(r, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lp = np.log(p) if log_p is None else np.atleast_1d(np.asarray(log_p, dtype=float))
            lr = np.log(r) if log_r is None else np.atleast_1d(np.asarray(log_r, dtype=float))
            out = np.zeros(np.broadcast(p, r).shape)
            p_none = lp == -np.inf
            r_none = lr == -np.inf

            only_p = r_none & ~p_none
            if only_p.any():
                if self.slope_at_infinity == math.inf:
                    out[only_p] = math.inf
                else:
                    out[only_p] = np.exp(lp[only_p]) * self.slope_at_infinity
            only_r = p_none & ~r_none
            if only_r.any():
                if self.at_zero == math.inf:
                    out[only_r] = math.inf
                else:
                    out[only_r] = np.exp(lr[only_r]) * self.at_zero

            both = ~p_none & ~r_none
            if both.any():
                pb, rb = p[both], r[both]
                u = pb / rb
                # subnormal masses have lost relative precision
                fast = (rb >= _NORMAL_MIN) & (pb >= _NORMAL_MIN) & np.isfinite(u)
                vals = np.empty(pb.shape)
                if fast.any():
                    vals[fast] = rb[fast] * self.func(u[fast])
                    fast &= np.isfinite(vals)
                slow = ~fast
                if slow.any():
                    lps, lrs = lp[both][slow], lr[both][slow]
                    if self.log_perspective is not None:
                        vals[slow] = self.log_perspective(lps, lrs)
                    else:
                        vals[slow] = _default_log_perspective(self, lps, lrs)
                out[both] = vals
        return out

    def cell_value(self, p, r, log_p=None, log_r=None):
        """Scalar version of :meth:`perspective`."""
        return float(self.perspective(p, r, log_p, log_r)[0])


@dataclass(frozen=True)
class NormalizedGenerator(Generator):
    """``f~(u) = f(u) - slope * (u - 1)`` for a support line at ``u = 1``."""

    base: Optional[Generator] = field(default=None, compare=False, repr=False)
    slope: float = 0.0


def eval_generator(g, u):
    """Return ``f(u)``; ``f(0)`` is the stored limit, possibly ``inf``."""
    u = float(u)
    if not math.isfinite(u) or u < 0:
        raise DomainError(f"generator argument must be finite and >= 0, got {u!r}")
    if u == 0.0:
        return g.at_zero
    return float(np.asarray(g.func(np.array([u])))[0])


# --------------------------------------------------------------------------
# boundary limits


def _extrapolate(values):
    """Limit of a slowly converging sequence, or ``inf`` if it diverges.

    The tail beyond the last term is estimated as geometric in the last two
    increments.  Increasing sequences whose increments do not shrink by at
    least 10% per step are treated as divergent.
    """
    v1, v2, v3 = values[-3:]
    if not all(math.isfinite(v) for v in (v1, v2, v3)):
        if v3 == math.inf:
            return math.inf
        raise GeneratorDefinitionError("generator returned NaN near the boundary")
    d1, d2 = v2 - v1, v3 - v2
    if d2 == 0.0:
        return v3
    ratio = d2 / d1 if d1 != 0.0 else math.inf
    if ratio >= 0.9 or ratio < 0:
        if d2 > 0 and ratio >= 0.9:
            return math.inf
        return v3
    return v3 + d2 * ratio / (1.0 - ratio)


def _limit_matches(values, stored):
    v1, v2, v3 = values[-3:]
    if any(math.isnan(v) for v in (v1, v2, v3)):
        return False
    d1, d2 = v2 - v1, v3 - v2
    if stored == math.inf:
        if v3 == math.inf:
            return True
        return d2 > 0 and d1 > 0 and d2 / d1 >= 0.9
    if not math.isfinite(v3):
        return False
    if d2 == 0.0 or d1 == 0.0:
        remaining = abs(d2)
    else:
        ratio = d2 / d1
        if ratio >= 1.0:
            return False
        remaining = abs(d2) * abs(ratio) / (1.0 - abs(ratio)) if ratio > 0 else abs(d2)
    return abs(v3 - stored) <= 2.0 * remaining + 1e-6 * (1.0 + abs(stored))


def boundary_limits(g):
    """Return ``(f(0), f'(inf))`` after checking them against the function.

    The check evaluates ``f(2**-k)`` and ``f(2**k) / 2**k`` for k up to 40 and
    compares the stored values with the extrapolated limits.
    """
    small = [float(np.asarray(g.func(np.array([2.0 ** -k])))[0]) for k in range(1, 41)]
    large = [float(np.asarray(g.func(np.array([2.0 ** k])))[0]) / 2.0 ** k for k in range(1, 41)]
    if not _limit_matches(small, g.at_zero):
        raise GeneratorDefinitionError(
            f"generator {g.name!r}: stored f(0) = {g.at_zero} disagrees with "
            f"f(2**-40) = {small[-1]}"
        )
    if not _limit_matches(large, g.slope_at_infinity):
        raise GeneratorDefinitionError(
            f"generator {g.name!r}: stored f'(inf) = {g.slope_at_infinity} disagrees "
            f"with f(2**40)/2**40 = {large[-1]}"
        )
    return g.at_zero, g.slope_at_infinity


# --------------------------------------------------------------------------
# subgradients and normalization


def _numeric_subgradient(f, u):
    # Richardson-refined one-sided difference quotients
    h = min(_DIFF_STEP * max(1.0, u), u / 4.0)

    def right(step):
        return (f(u + step) - f(u)) / step

    def left(step):
        return (f(u) - f(u - step)) / step

    r = 2.0 * right(h / 2.0) - right(h)
    l = 2.0 * left(h / 2.0) - left(h)
    if l > r:
        l = r = 0.5 * (l + r)
    return (l, r)


def subgradient(g, u):
    """One-sided derivatives ``(f'_-(u), f'_+(u))`` at ``u > 0``."""
    u = float(u)
    if not u > 0 or not math.isfinite(u):
        raise DomainError(f"subgradient needs a finite u > 0, got {u!r}")
    if g.derivative is not None:
        left, right = g.derivative(u)
        return float(left), float(right)
    return _numeric_subgradient(lambda x: eval_generator(g, x), u)


def normalize(g):
    """Subtract the support line at 1 whose slope is the subgradient midpoint.

    The result is nonnegative, nonincreasing on (0, 1] and nondecreasing on
    [1, inf).  Divergences and partition values do not change.
    """
    lo, hi = g.subgradient_at_one
    a = 0.5 * (lo + hi)
    base_func = g.func

    def func(u):
        u = np.asarray(u, dtype=float)
        return base_func(u) - a * (u - 1.0)

    derivative = None
    if g.derivative is not None:
        base_derivative = g.derivative

        def derivative(u):
            left, right = base_derivative(u)
            return left - a, right - a

    log_perspective = None
    if g.log_perspective is not None:
        base_lp = g.log_perspective

        def log_perspective(log_p, log_r):
            return base_lp(log_p, log_r) - a * (np.exp(log_p) - np.exp(log_r))

    root = g.base if isinstance(g, NormalizedGenerator) and g.base is not None else g
    return NormalizedGenerator(
        name=g.name if isinstance(g, NormalizedGenerator) else g.name + "~",
        func=func,
        at_zero=g.at_zero + a,
        slope_at_infinity=g.slope_at_infinity - a,
        subgradient_at_one=(lo - a, hi - a),
        derivative=derivative,
        log_perspective=log_perspective,
        base=root,
        slope=a,
    )


def check_convexity(g, n=1000, rng=None, rtol=1e-9, low=0.0, high=50.0):
    """Sample ``n`` random triples and return the worst convexity violation.

    Raises :class:`GeneratorDefinitionError` if any violation exceeds
    ``rtol`` relative to the magnitude of the chord.
    """
    rng = np.random.default_rng(rng)
    u1 = rng.uniform(low, high, n)
    u2 = rng.uniform(low, high, n)
    t = rng.uniform(0.0, 1.0, n)
    mid = t * u1 + (1 - t) * u2
    f = lambda x: np.where(x == 0.0, g.at_zero, g.func(np.where(x == 0.0, 1.0, x)))
    chord = t * f(u1) + (1 - t) * f(u2)
    excess = f(mid) - chord
    scale = 1.0 + np.abs(chord)
    worst = float(np.max(excess / scale))
    if worst > rtol:
        raise GeneratorDefinitionError(
            f"generator {g.name!r} fails convexity by {worst:.3g} (relative)"
        )
    return worst


# --------------------------------------------------------------------------
# level thresholds


def level_threshold(ng, n):
    """``b_n = inf{u > 1 : f~(u) >= n}`` for a normalized generator.

    Returns ``inf`` when ``f~`` stays below ``n`` up to ``THRESHOLD_CAP``.
    """
    if n < 1:
        raise DomainError(f"level must be >= 1, got {n!r}")
    f = lambda u: eval_generator(ng, u)
    lo, hi = 1.0, 2.0
    while f(hi) < n:
        lo, hi = hi, hi * 2.0
        if hi > THRESHOLD_CAP:
            return math.inf
    while hi - lo > THRESHOLD_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) >= n:
            hi = mid
        else:
            lo = mid
    return hi


def lower_level_threshold(ng, n):
    """``c_n = sup{u in [0, 1) : f~(u) >= n}`` on the nonincreasing branch.

    Returns ``None`` when the set is empty (``f~(0) < n``).
    """
    if n < 1:
        raise DomainError(f"level must be >= 1, got {n!r}")
    if ng.at_zero < n:
        return None
    f = lambda u: eval_generator(ng, u)
    lo, hi = 0.0, 1.0
    while hi - lo > THRESHOLD_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) >= n:
            lo = mid
        else:
            hi = mid
    return lo


# --------------------------------------------------------------------------
# built-in generators


def _kl_log_perspective(log_p, log_r):
    return np.exp(log_p) * (log_p - log_r)


def kl():
    """Information divergence, ``f(u) = u ln u``."""
    return Generator(
        name="kl",
        func=lambda u: xlogy(u, u),
        at_zero=0.0,
        slope_at_infinity=math.inf,
        subgradient_at_one=(1.0, 1.0),
        derivative=lambda u: (math.log(u) + 1.0,) * 2,
        log_perspective=_kl_log_perspective,
    )


def _tv_derivative(u):
    if u < 1.0:
        return (-1.0, -1.0)
    if u > 1.0:
        return (1.0, 1.0)
    return (-1.0, 1.0)


def total_variation():
    """Variational distance, ``f(u) = |u - 1|``."""
    return Generator(
        name="tv",
        func=lambda u: np.abs(np.asarray(u, dtype=float) - 1.0),
        at_zero=1.0,
        slope_at_infinity=1.0,
        subgradient_at_one=(-1.0, 1.0),
        derivative=_tv_derivative,
        log_perspective=lambda lp, lr: np.abs(np.exp(lp) - np.exp(lr)),
    )


def _chi2_log_perspective(log_p, log_r):
    # log|p - r| without leaving log space
    hi = np.maximum(log_p, log_r)
    gap = np.abs(log_p - log_r)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_d = hi + np.log(-np.expm1(-gap))
        return np.where(gap == 0.0, 0.0, np.exp(2.0 * log_d - log_r))


def chi_square():
    """Pearson chi-square, ``f(u) = (u - 1)**2``."""
    return Generator(
        name="chi2",
        func=lambda u: (np.asarray(u, dtype=float) - 1.0) ** 2,
        at_zero=1.0,
        slope_at_infinity=math.inf,
        subgradient_at_one=(0.0, 0.0),
        derivative=lambda u: (2.0 * (u - 1.0),) * 2,
        log_perspective=_chi2_log_perspective,
    )


def hellinger():
    """Hellinger discrimination, ``f(u) = (sqrt(u) - 1)**2``."""
    return Generator(
        name="hellinger",
        func=lambda u: (np.sqrt(np.asarray(u, dtype=float)) - 1.0) ** 2,
        at_zero=1.0,
        slope_at_infinity=1.0,
        subgradient_at_one=(0.0, 0.0),
        derivative=lambda u: (1.0 - 1.0 / math.sqrt(u),) * 2,
        log_perspective=lambda lp, lr: (np.exp(0.5 * lp) - np.exp(0.5 * lr)) ** 2,
    )


def tsallis_generator(alpha):
    """``f(u) = (u**alpha - 1) / (alpha - 1)`` for ``alpha > 0``, ``alpha != 1``."""
    alpha = float(alpha)
    if not alpha > 0 or alpha == 1.0 or not math.isfinite(alpha):
        raise DomainError(
            f"Tsallis order must be > 0 and != 1, got {alpha!r}; request 'kl' for the limit"
        )
    c = 1.0 / (alpha - 1.0)
    d1 = alpha * c

    def func(u):
        return (np.power(np.asarray(u, dtype=float), alpha) - 1.0) * c

    def derivative(u):
        return (d1 * u ** (alpha - 1.0),) * 2

    def log_perspective(log_p, log_r):
        return (np.exp(alpha * log_p + (1.0 - alpha) * log_r) - np.exp(log_r)) * c

    return Generator(
        name=f"tsallis:{alpha:g}",
        func=func,
        at_zero=-c,
        slope_at_infinity=math.inf if alpha > 1 else 0.0,
        subgradient_at_one=(d1, d1),
        derivative=derivative,
        log_perspective=log_perspective,
    )


_BUILTINS = {
    "kl": kl,
    "tv": total_variation,
    "chi2": chi_square,
    "hellinger": hellinger,
}


def builtin_generator(spec):
    """Look up a generator by its CLI name (``kl``, ``tsallis:2``, ...)."""
    spec = spec.strip()
    if spec in _BUILTINS:
        return _BUILTINS[spec]()
    if spec.startswith("tsallis:"):
        try:
            alpha = float(spec.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad Tsallis order in {spec!r}") from None
        return tsallis_generator(alpha)
    raise DomainError(
        f"unknown generator {spec!r}; expected kl, tv, chi2, hellinger or tsallis:<alpha>"
    )
