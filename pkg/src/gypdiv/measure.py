"""Dominated measure pairs queried through likelihood-ratio level sets.

Every model answers the same two questions about the likelihood ratio
``rho = p / r`` (densities with respect to ``mu = P + R``):

* the masses ``P(rho in I)`` and ``R(rho in I)`` for a ratio interval ``I``;
* the restricted divergence ``int_{rho in I} f(rho) r dmu``.

Ratios are compared in log space.  ``log rho = -inf`` is the atom where
``p = 0`` and ``log rho = +inf`` the atom where ``r = 0``.  The set where
both densities vanish is null under ``mu`` and never appears.  Masses come
with their logarithms so that cells whose mass underflows a double (which
happens quickly for countable pairs with geometric tails) still produce
exact-to-rounding divergence contributions.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import log_ndtr, logsumexp, ndtr

from .errors import (
    AccuracyError,
    DefinitionError,
    DomainError,
    LengthMismatchError,
    NegativeEntryError,
    NotNormalizedError,
)

__all__ = [
    "CellMass",
    "CountablePair",
    "DiscretePair",
    "DivergenceValue",
    "GaussianPair",
    "GridPair",
    "Interval",
    "MeasurePair",
    "COUNTABLE_REGISTRY",
    "countable_pair",
    "gaussian_pair",
    "grid_pair",
    "load_pair",
    "make_discrete_pair",
    "named_countable_pair",
    "pair_from_dict",
]

NORMALIZATION_TOL = 1e-10
COUNTABLE_SUM_TOL = 1e-9
DEFAULT_COUNTABLE_CAP = 10**6
QUAD_TOL_ENV = "GYPDIV_QUAD_TOL"
DEFAULT_QUAD_TOL = 1e-10

# Below this a float mass may have lost relative precision or underflowed,
# so its log is recomputed from the per-atom logs.
_TINY = 1e-290


def default_quad_tol():
    raw = os.environ.get(QUAD_TOL_ENV)
    if raw is None:
        return DEFAULT_QUAD_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise DomainError(f"{QUAD_TOL_ENV}={raw!r} is not a number") from None
    if not tol > 0:
        raise DomainError(f"{QUAD_TOL_ENV} must be positive, got {tol}")
    return tol


@dataclass(frozen=True)
class DivergenceValue:
    """A divergence (or bound) with an absolute error estimate."""

    value: float
    error_bound: float = 0.0

    @property
    def finite(self):
        return math.isfinite(self.value)

    def __float__(self):
        return float(self.value)


class CellMass(NamedTuple):
    p: float
    r: float
    log_p: float
    log_r: float


def _log(x):
    return math.log(x) if x > 0 else -math.inf


# --------------------------------------------------------------------------
# ratio intervals


@dataclass(frozen=True)
class Interval:
    """A set of likelihood ratios, stored by its log endpoints.

    ``log_lo = -inf`` means the interval starts at ratio 0, ``log_hi = inf``
    that it reaches ratio +inf; whether those atoms are included follows
    the closedness flags, as for any other endpoint.
    """

    log_lo: float
    log_hi: float
    left_closed: bool = True
    right_closed: bool = False

    def __post_init__(self):
        if math.isnan(self.log_lo) or math.isnan(self.log_hi):
            raise DomainError("interval endpoint is NaN")
        if self.log_lo > self.log_hi:
            raise DomainError(f"malformed interval: lower end above upper end ({self})")

    @classmethod
    def from_ratio(cls, lo, hi, left_closed=True, right_closed=False):
        lo, hi = float(lo), float(hi)
        if lo < 0 or hi < 0 or math.isnan(lo) or math.isnan(hi):
            raise DomainError(f"ratio endpoints must lie in [0, inf], got ({lo}, {hi})")
        return cls(_log(lo), _log(hi), bool(left_closed), bool(right_closed))

    @classmethod
    def closed(cls, lo, hi):
        return cls.from_ratio(lo, hi, True, True)

    @classmethod
    def full(cls):
        return cls(-math.inf, math.inf, True, True)

    @classmethod
    def point(cls, ratio):
        return cls.from_ratio(ratio, ratio, True, True)

    @property
    def lo(self):
        return math.exp(self.log_lo)

    @property
    def hi(self):
        return math.exp(self.log_hi)

    @property
    def is_empty(self):
        return self.log_lo == self.log_hi and not (self.left_closed and self.right_closed)

    def contains(self, keys):
        """Vectorized membership test for log ratios."""
        keys = np.asarray(keys, dtype=float)
        above = keys >= self.log_lo if self.left_closed else keys > self.log_lo
        below = keys <= self.log_hi if self.right_closed else keys < self.log_hi
        return above & below

    def contains_ratio(self, ratio):
        with np.errstate(divide="ignore"):
            return self.contains(np.log(np.asarray(ratio, dtype=float)))

    def __str__(self):
        lb = "[" if self.left_closed else "("
        rb = "]" if self.right_closed else ")"
        return f"{lb}{self.lo:.17g}, {self.hi:.17g}{rb}"


# --------------------------------------------------------------------------
# base class


class MeasurePair:
    """Interface shared by all measure models."""

    model = "abstract"
    #: absolute tolerance of mass queries
    mass_tol = 1e-12

    def cell_masses(self, interval):
        raise NotImplementedError

    def ratio_interval_masses(self, interval):
        """``(P(rho in I), R(rho in I))``."""
        m = self.cell_masses(interval)
        return m.p, m.r

    def partition_masses(self, log_lo, log_hi, left_closed, right_closed):
        """Masses of the cells of a tiling, as four arrays (p, r, log_p, log_r)."""
        cells = [
            self.cell_masses(Interval(a, b, bool(lc), bool(rc)))
            for a, b, lc, rc in zip(log_lo, log_hi, left_closed, right_closed)
        ]
        arr = np.array(cells, dtype=float).reshape(-1, 4)
        return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]

    def restricted_divergence(self, g, interval):
        raise NotImplementedError

    @property
    def ratio_range(self):
        raise NotImplementedError

    @property
    def is_atomic(self):
        return False


# --------------------------------------------------------------------------
# atomic models


def _atom_keys(p, r, log_p, log_r):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = p / r
        keys = np.log(ratio)
        bad = ~((ratio > 0) & np.isfinite(ratio))
        keys[bad] = (log_p - log_r)[bad]
    return keys


class AtomicPair(MeasurePair):
    """A pair supported on countably many atoms, given by their masses."""

    def __init__(self, p, r, log_p=None, log_r=None):
        p = np.asarray(p, dtype=float)
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            log_p = np.log(p) if log_p is None else np.asarray(log_p, dtype=float)
            log_r = np.log(r) if log_r is None else np.asarray(log_r, dtype=float)
        support = (log_p > -np.inf) | (log_r > -np.inf)
        self._p_all, self._r_all = p, r
        self.support = np.flatnonzero(support)
        self.p = p[support]
        self.r = r[support]
        self.log_p = log_p[support]
        self.log_r = log_r[support]
        self.keys = _atom_keys(self.p, self.r, self.log_p, self.log_r)
        order = np.argsort(self.keys, kind="stable")
        self._order = order
        self._skeys = self.keys[order]
        self._sp = self.p[order]
        self._sr = self.r[order]
        self._slp = self.log_p[order]
        self._slr = self.log_r[order]

    @property
    def is_atomic(self):
        return True

    @property
    def n_atoms(self):
        return len(self.p)

    def sorted_atoms(self):
        """Atoms in increasing ratio order: (log_ratio, p, r, log_p, log_r)."""
        return self._skeys, self._sp, self._sr, self._slp, self._slr

    def _bounds(self, log_lo, log_hi, left_closed, right_closed):
        log_lo = np.atleast_1d(np.asarray(log_lo, dtype=float))
        log_hi = np.atleast_1d(np.asarray(log_hi, dtype=float))
        start = np.where(
            left_closed,
            np.searchsorted(self._skeys, log_lo, side="left"),
            np.searchsorted(self._skeys, log_lo, side="right"),
        )
        stop = np.where(
            right_closed,
            np.searchsorted(self._skeys, log_hi, side="right"),
            np.searchsorted(self._skeys, log_hi, side="left"),
        )
        return start, np.maximum(stop, start)

    def _slice_masses(self, start, stop):
        n = len(self._sp)
        k = len(start)
        p = np.zeros(k)
        r = np.zeros(k)
        nonempty = stop > start
        if n and nonempty.any():
            idx = np.column_stack([start[nonempty], stop[nonempty]]).ravel()
            p[nonempty] = np.add.reduceat(np.append(self._sp, 0.0), idx)[::2]
            r[nonempty] = np.add.reduceat(np.append(self._sr, 0.0), idx)[::2]
        with np.errstate(divide="ignore"):
            lp = np.log(p)
            lr = np.log(r)
        for logs, masses, atom_logs in ((lp, p, self._slp), (lr, r, self._slr)):
            redo = np.flatnonzero(nonempty & (masses < _TINY))
            for j in redo:
                a, b = start[j], stop[j]
                logs[j] = atom_logs[a] if b - a == 1 else logsumexp(atom_logs[a:b])
        return p, r, lp, lr

    def cell_masses(self, interval):
        start, stop = self._bounds(
            interval.log_lo, interval.log_hi, interval.left_closed, interval.right_closed
        )
        p, r, lp, lr = self._slice_masses(start, stop)
        return CellMass(float(p[0]), float(r[0]), float(lp[0]), float(lr[0]))

    def partition_masses(self, log_lo, log_hi, left_closed, right_closed):
        start, stop = self._bounds(log_lo, log_hi, left_closed, right_closed)
        return self._slice_masses(start, stop)

    def restricted_divergence(self, g, interval):
        inside = interval.contains(self.keys)
        if not inside.any():
            return DivergenceValue(0.0, 0.0)
        vals = g.perspective(self.p[inside], self.r[inside],
                             self.log_p[inside], self.log_r[inside])
        return DivergenceValue(float(np.sum(vals)), 0.0)

    @property
    def ratio_range(self):
        if not len(self.keys):
            return (1.0, 1.0)
        return (math.exp(self._skeys[0]), math.exp(self._skeys[-1]))


def _as_vector(x, name):
    try:
        arr = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a vector of numbers") from None
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError(f"{name} must be a non-empty one-dimensional vector")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


class DiscretePair(AtomicPair):
    """Two probability vectors on a common finite set."""

    model = "discrete"

    def __init__(self, p, r, log_p=None, log_r=None):
        super().__init__(p, r, log_p, log_r)
        self.p_vector = self._p_all
        self.r_vector = self._r_all

    @property
    def ratios(self):
        """Ratios ``p_i / r_i`` of the supported atoms, in input order."""
        return np.exp(self.keys)

    def __repr__(self):
        return f"DiscretePair(p={self.p_vector.tolist()}, r={self.r_vector.tolist()})"


def make_discrete_pair(p, r):
    """Validate two probability vectors and build a :class:`DiscretePair`."""
    p = _as_vector(p, "p")
    r = _as_vector(r, "r")
    if p.shape != r.shape:
        raise LengthMismatchError(f"p has {p.size} entries but r has {r.size}")
    for name, v in (("p", p), ("r", r)):
        if np.any(v < 0):
            raise NegativeEntryError(f"{name} has a negative entry")
        total = math.fsum(v)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalizedError(f"{name} sums to {total!r}, not 1")
    return DiscretePair(p, r)


class GridPair(DiscretePair):
    """Piecewise-constant densities on the cells of a grid.

    On each cell the likelihood ratio is the ratio of the cell masses, so
    the pair behaves exactly like the discrete pair of cell masses.
    """

    model = "grid"

    def __init__(self, edges, p_mass, r_mass):
        super().__init__(p_mass, r_mass)
        self.edges = np.asarray(edges, dtype=float)


def grid_pair(edges, p_mass, r_mass):
    edges = _as_vector(edges, "edges")
    if np.any(np.diff(edges) <= 0):
        raise DomainError("grid edges must be strictly increasing")
    base = make_discrete_pair(p_mass, r_mass)
    if edges.size != base.p_vector.size + 1:
        raise LengthMismatchError(
            f"{edges.size} edges do not bound {base.p_vector.size} cells"
        )
    return GridPair(edges, base.p_vector, base.r_vector)


# --------------------------------------------------------------------------
# countable pairs


def _evaluate_terms(term, idx, vectorized):
    if vectorized:
        return np.asarray(term(idx), dtype=float)
    return np.fromiter((term(int(i)) for i in idx), dtype=float, count=len(idx))


class CountablePair(AtomicPair):
    """Atoms indexed by ``i >= 1``, enumerated up to ``cap``.

    Mass beyond the cap is not represented; ``truncation`` reports
    ``1 - sum_{i <= cap}`` for each measure.
    """

    model = "countable"

    def __init__(self, p, r, log_p, log_r, cap, name=None):
        super().__init__(p, r, log_p, log_r)
        self.cap = cap
        self.name = name
        self.truncation = (
            max(0.0, 1.0 - math.fsum(p)),
            max(0.0, 1.0 - math.fsum(r)),
        )

    def __repr__(self):
        label = self.name or "custom"
        return f"CountablePair({label!r}, cap={self.cap})"


def countable_pair(p_term, r_term, cap=DEFAULT_COUNTABLE_CAP, log_p_term=None,
                   log_r_term=None, vectorized=False, name=None):
    """Enumerate ``p_term(i)``, ``r_term(i)`` for ``i = 1..cap``.

    Optional log terms supply masses too small for a double.  Raises
    :class:`DefinitionError` if either partial sum exceeds ``1 + 1e-9``.
    """
    cap = int(cap)
    if cap < 1:
        raise DomainError(f"enumeration cap must be >= 1, got {cap}")
    idx = np.arange(1, cap + 1)
    p = _evaluate_terms(p_term, idx, vectorized)
    r = _evaluate_terms(r_term, idx, vectorized)
    for label, v in (("p", p), ("r", r)):
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DefinitionError(f"{label} terms must be finite and nonnegative")
        partial = np.cumsum(v)
        over = np.flatnonzero(partial > 1.0 + COUNTABLE_SUM_TOL)
        if over.size:
            i = int(over[0]) + 1
            raise DefinitionError(
                f"partial sum of {label} reaches {partial[over[0]]!r} > 1 at i = {i}"
            )
    with np.errstate(divide="ignore"):
        lp = _evaluate_terms(log_p_term, idx, vectorized) if log_p_term else np.log(p)
        lr = _evaluate_terms(log_r_term, idx, vectorized) if log_r_term else np.log(r)
    return CountablePair(p, r, lp, lr, cap, name=name)


def _zeta_p(i):
    i = np.asarray(i, dtype=float)
    return 1.0 / (i * (i + 1.0))


def _zeta_log_p(i):
    i = np.asarray(i, dtype=float)
    return -np.log(i) - np.log1p(i)


def _geometric(i):
    return np.exp2(-np.asarray(i, dtype=float))


def _geometric_log(i):
    return -np.asarray(i, dtype=float) * math.log(2.0)


COUNTABLE_REGISTRY = {
    # p_i = 1/(i(i+1)) against r_i = 2^-i; KL(P||R) is infinite
    "zeta_vs_geometric": (_zeta_p, _geometric, _zeta_log_p, _geometric_log),
    "geometric_vs_zeta": (_geometric, _zeta_p, _geometric_log, _zeta_log_p),
    "geometric_identical": (_geometric, _geometric, _geometric_log, _geometric_log),
}


def named_countable_pair(name, cap=DEFAULT_COUNTABLE_CAP):
    try:
        p, r, lp, lr = COUNTABLE_REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(COUNTABLE_REGISTRY))
        raise DomainError(f"unknown countable pair {name!r}; known: {known}") from None
    return countable_pair(p, r, cap, lp, lr, vectorized=True, name=name)


# --------------------------------------------------------------------------
# Gaussian pairs


def _log1mexp(d):
    """``log(1 - exp(d))`` for ``d <= 0``."""
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d > -math.log(2.0), np.log(-np.expm1(d)), np.log1p(-np.exp(d)))


def _log_normal_mass(a, b, mean, sd):
    """Log of the N(mean, sd) mass of [a, b], accurate in both tails."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    za = (a - mean) / sd
    zb = (b - mean) / sd
    out = np.full(np.broadcast(za, zb).shape, -np.inf)
    with np.errstate(invalid="ignore", divide="ignore"):
        ok = zb > za
        upper = ok & (za >= 0)
        lower = ok & (zb <= 0) & ~upper
        middle = ok & ~upper & ~lower
        if upper.any():
            la, lb = log_ndtr(-za[upper]), log_ndtr(-zb[upper])
            out[upper] = la + _log1mexp(lb - la)
        if lower.any():
            la, lb = log_ndtr(za[lower]), log_ndtr(zb[lower])
            out[lower] = lb + _log1mexp(la - lb)
        if middle.any():
            out[middle] = np.log1p(-(ndtr(-zb[middle]) + ndtr(za[middle])))
    return out


class GaussianPair(MeasurePair):
    """``P = N(mean1, sd1)`` and ``R = N(mean2, sd2)`` on the real line.

    ``log rho(x) = A x^2 + B x + C`` so every ratio level set is a union of
    at most two intervals whose endpoints are roots of a quadratic.
    """

    model = "gaussian"

    def __init__(self, mean1, sd1, mean2, sd2, quad_tol=None):
        vals = [float(v) for v in (mean1, sd1, mean2, sd2)]
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("Gaussian parameters must be finite")
        self.mean1, self.sd1, self.mean2, self.sd2 = vals
        if not (self.sd1 > 0 and self.sd2 > 0):
            raise DomainError(f"standard deviations must be positive, got {self.sd1}, {self.sd2}")
        self.quad_tol = default_quad_tol() if quad_tol is None else float(quad_tol)
        s1, s2, m1, m2 = self.sd1, self.sd2, self.mean1, self.mean2
        self.A = 0.5 / s2**2 - 0.5 / s1**2
        self.B = m1 / s1**2 - m2 / s2**2
        self.C = math.log(s2 / s1) - 0.5 * m1**2 / s1**2 + 0.5 * m2**2 / s2**2
        if self.A != 0.0:
            self.vertex = -self.B / (2.0 * self.A)
            self.vertex_value = self.C - self.B**2 / (4.0 * self.A)
        else:
            self.vertex = self.vertex_value = None

    def __repr__(self):
        return (f"GaussianPair(N({self.mean1:g}, {self.sd1:g}) vs "
                f"N({self.mean2:g}, {self.sd2:g}))")

    @property
    def identical(self):
        return self.A == 0.0 and self.B == 0.0

    def log_ratio(self, x):
        x = np.asarray(x, dtype=float)
        return (self.A * x + self.B) * x + self.C

    def log_densities(self, x):
        x = np.asarray(x, dtype=float)
        half_log_2pi = 0.5 * math.log(2.0 * math.pi)
        lp = -0.5 * ((x - self.mean1) / self.sd1) ** 2 - math.log(self.sd1) - half_log_2pi
        lr = -0.5 * ((x - self.mean2) / self.sd2) ** 2 - math.log(self.sd2) - half_log_2pi
        return lp, lr

    # level sets ----------------------------------------------------------

    def _roots(self, t):
        """Roots (xl, xr) of log rho(x) = t, collapsed to the vertex if none."""
        t = np.asarray(t, dtype=float)
        A, B, C = self.A, self.B, self.C
        xl = np.full(t.shape, self.vertex)
        xr = np.full(t.shape, self.vertex)
        # A > 0: {q <= +inf} is the whole line; A < 0: {q >= -inf} is
        wide = (t == np.inf) if A > 0 else (t == -np.inf)
        xl[wide] = -np.inf
        xr[wide] = np.inf
        fin = np.isfinite(t)
        if fin.any():
            c = C - t[fin]
            disc = B * B - 4.0 * A * c
            real = disc > 0
            sq = np.sqrt(np.where(real, disc, 0.0))
            qq = -0.5 * (B + math.copysign(1.0, B) * sq)
            with np.errstate(divide="ignore", invalid="ignore"):
                r1 = qq / A
                r2 = np.where(qq != 0.0, c / qq, r1)
            lo = np.minimum(r1, r2)
            hi = np.maximum(r1, r2)
            sub_l = xl[fin]
            sub_r = xr[fin]
            sub_l[real] = lo[real]
            sub_r[real] = hi[real]
            xl[fin] = sub_l
            xr[fin] = sub_r
        return xl, xr

    def _linear_point(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(invalid="ignore"):
            return (t - self.C) / self.B

    def level_set_intervals(self, log_lo, log_hi):
        """x-intervals ``(a1, b1), (a2, b2)`` whose union is {log rho in [lo, hi]}.

        Works elementwise on arrays; empty pieces have ``a >= b``.  Only
        valid for non-identical pairs, where boundaries carry no mass.
        """
        lo = np.asarray(log_lo, dtype=float)
        hi = np.asarray(log_hi, dtype=float)
        A, B = self.A, self.B
        if A > 0:
            l_hi, r_hi = self._roots(hi)
            l_lo, r_lo = self._roots(lo)
            return (l_hi, l_lo), (r_lo, r_hi)
        if A < 0:
            l_lo, r_lo = self._roots(lo)
            l_hi, r_hi = self._roots(hi)
            return (l_lo, l_hi), (r_hi, r_lo)
        x_lo = self._linear_point(lo)
        x_hi = self._linear_point(hi)
        nan = np.full(lo.shape, np.nan)
        if B > 0:
            return (x_lo, x_hi), (nan, nan)
        return (x_hi, x_lo), (nan, nan)

    def _cell_logs(self, log_lo, log_hi, left_closed, right_closed):
        log_lo = np.atleast_1d(np.asarray(log_lo, dtype=float))
        log_hi = np.atleast_1d(np.asarray(log_hi, dtype=float))
        if self.identical:
            key = np.full(log_lo.shape, self.C)
            lc = np.broadcast_to(np.asarray(left_closed), log_lo.shape)
            rc = np.broadcast_to(np.asarray(right_closed), log_lo.shape)
            above = np.where(lc, key >= log_lo, key > log_lo)
            below = np.where(rc, key <= log_hi, key < log_hi)
            full = above & below
            logs = np.where(full, 0.0, -np.inf)
            return logs, logs.copy()
        (a1, b1), (a2, b2) = self.level_set_intervals(log_lo, log_hi)
        lp = np.logaddexp(
            _log_normal_mass(a1, b1, self.mean1, self.sd1),
            _log_normal_mass(a2, b2, self.mean1, self.sd1),
        )
        lr = np.logaddexp(
            _log_normal_mass(a1, b1, self.mean2, self.sd2),
            _log_normal_mass(a2, b2, self.mean2, self.sd2),
        )
        return lp, lr

    def cell_masses(self, interval):
        lp, lr = self._cell_logs(
            interval.log_lo, interval.log_hi, interval.left_closed, interval.right_closed
        )
        lp, lr = float(lp[0]), float(lr[0])
        return CellMass(math.exp(lp), math.exp(lr), lp, lr)

    def partition_masses(self, log_lo, log_hi, left_closed, right_closed):
        lp, lr = self._cell_logs(log_lo, log_hi, left_closed, right_closed)
        return np.exp(lp), np.exp(lr), lp, lr

    # integrals -----------------------------------------------------------

    def _breakpoints(self):
        pts = []
        for m, s in ((self.mean1, self.sd1), (self.mean2, self.sd2)):
            for k in (0.0, 2.0, 5.0, 10.0, 20.0, 40.0):
                pts.extend((m - k * s, m + k * s))
        # generators are typically kinked at ratio 1, e.g. |u - 1|
        if self.A != 0.0:
            pts.append(self.vertex)
            pts.extend(float(x[0]) for x in self._roots(np.array([0.0])))
        elif self.B != 0.0:
            pts.append(float(self._linear_point(np.array([0.0]))[0]))
        return sorted(x for x in set(pts) if math.isfinite(x))

    def _tail_diverges(self, integrand, start, direction):
        scale = max(self.sd1, self.sd2, abs(self.mean1 - self.mean2), 1.0)
        xs = [start + direction * scale * k for k in (50.0, 100.0, 200.0, 400.0)]
        vals = [integrand(x) for x in xs]
        if any(v == math.inf for v in vals):
            return True
        return all(v > 0 for v in vals) and vals[0] <= vals[1] <= vals[2] <= vals[3]

    def restricted_divergence(self, g, interval):
        """Adaptive quadrature of ``r f(p/r)`` over the level set of ``interval``."""
        if interval.is_empty:
            return DivergenceValue(0.0, 0.0)
        if self.identical:
            m = self.cell_masses(interval)
            return DivergenceValue(g.cell_value(m.p, m.r, m.log_p, m.log_r), 0.0)

        def integrand(x):
            lp, lr = self.log_densities(x)
            return float(g.perspective(math.exp(lp), math.exp(lr), lp, lr)[0])

        (a1, b1), (a2, b2) = self.level_set_intervals(
            np.array([interval.log_lo]), np.array([interval.log_hi])
        )
        pieces = [(float(a1[0]), float(b1[0])), (float(a2[0]), float(b2[0]))]
        breaks = self._breakpoints()
        total = 0.0
        err = 0.0
        warned = False
        for a, b in pieces:
            if not (b > a):
                continue
            if a == -math.inf and self._tail_diverges(integrand, min(breaks[0], b), -1.0):
                return DivergenceValue(math.inf, 0.0)
            if b == math.inf and self._tail_diverges(integrand, max(breaks[-1], a), 1.0):
                return DivergenceValue(math.inf, 0.0)
            knots = [a] + [x for x in breaks if a < x < b] + [b]
            for lo, hi in zip(knots[:-1], knots[1:]):
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    val, e = integrate.quad(
                        integrand, lo, hi, epsabs=self.quad_tol, epsrel=1e-12, limit=200
                    )
                if caught:
                    warned = True
                total += val
                err += e
        if not math.isfinite(total):
            return DivergenceValue(math.inf, 0.0)
        result = DivergenceValue(total, err + self.quad_tol)
        if warned and err > 1e3 * self.quad_tol:
            raise AccuracyError(
                f"quadrature did not converge (error estimate {err:.3g})", best_estimate=result
            )
        return result

    @property
    def ratio_range(self):
        if self.identical:
            return (math.exp(self.C), math.exp(self.C))
        if self.A > 0:
            return (math.exp(self.vertex_value), math.inf)
        if self.A < 0:
            return (0.0, math.exp(self.vertex_value))
        return (0.0, math.inf)


def gaussian_pair(mean1, sd1, mean2, sd2, quad_tol=None):
    return GaussianPair(mean1, sd1, mean2, sd2, quad_tol=quad_tol)


# --------------------------------------------------------------------------
# JSON pair files


def pair_from_dict(spec):
    """Build a pair from the JSON schema used by pair files."""
    if not isinstance(spec, dict) or "model" not in spec:
        raise DomainError("pair specification must be an object with a 'model' field")
    model = spec["model"]
    try:
        if model == "discrete":
            return make_discrete_pair(spec["p"], spec["r"])
        if model == "gaussian":
            p, r = spec["p"], spec["r"]
            return gaussian_pair(p["mean"], p["sd"], r["mean"], r["sd"],
                                 quad_tol=spec.get("quad_tol"))
        if model == "grid":
            return grid_pair(spec["edges"], spec["p_mass"], spec["r_mass"])
        if model == "countable":
            return named_countable_pair(spec["name"], spec.get("cap", DEFAULT_COUNTABLE_CAP))
    except KeyError as exc:
        raise DomainError(f"pair specification for model {model!r} lacks field {exc}") from None
    except TypeError as exc:
        raise DomainError(f"malformed pair specification: {exc}") from None
    raise DomainError(f"unknown pair model {model!r}")


def load_pair(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read pair file {path}: {exc.strerror}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"pair file {path} is not valid JSON: {exc}") from None
    return pair_from_dict(spec)
