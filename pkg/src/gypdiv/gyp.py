"""Constructive partitions that certify the supremum representation.

:func:`gyp_approximate` builds, for a finite divergence, a partition whose
discretized divergence is within ``epsilon`` of the true value:

1. normalize the generator so that it is >= 0 with minimum at 1;
2. shrink ``H`` until the lower tail ``{rho < H}`` loses less than
   ``epsilon/3`` when collapsed to one cell, and grow ``K`` likewise for
   ``{rho > K}``;
3. cut ``[H, K]`` into equal ratio cells narrower than
   ``delta = epsilon / (3 L)``, where ``L`` bounds the slope of the
   normalized generator on ``[H, K]``.

:func:`detect_infinite` collects the level-set cells of the normalized
generator; when the divergence is infinite their contributions sum past
any target ``M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .divergence import divergence
from .errors import AccuracyError, DomainError, InfiniteDivergenceError, SizeGuardError
from .generator import (
    eval_generator,
    level_threshold,
    lower_level_threshold,
    normalize,
    subgradient,
)
from .measure import CellMass, DivergenceValue, Interval
from .partition import Partition, common_refinement, partition_divergence

__all__ = [
    "ApproxResult",
    "EvidenceCell",
    "InfinityEvidence",
    "SweepRow",
    "convergence_sweep",
    "detect_infinite",
    "gyp_approximate",
]

H_FLOOR = 1e-12
K_CAP = 1e12
MAX_CELLS = 5_000_000
# above this, integer levels of f~ are no longer exact in double precision
_LEVEL_EXACT = 2.0**52


def _ext(x):
    return x if math.isfinite(x) else {"extended": "+inf" if x > 0 else "-inf"}


@dataclass(frozen=True)
class ApproxResult:
    """An epsilon-certificate: the partition and the data that justify it."""

    partition: Partition
    lower_bound: float
    epsilon: float
    H0: float
    K0: float
    delta: float
    tail_gap_low: float
    tail_gap_high: float
    reference: DivergenceValue
    lipschitz: float
    m_interior: int

    @property
    def gap(self):
        return self.reference.value - self.lower_bound

    @property
    def m_cells(self):
        return len(self.partition)

    @property
    def certified(self):
        tol = self.reference.error_bound
        return (self.gap <= self.epsilon + tol
                and self.lower_bound <= self.reference.value + tol + 1e-12)

    def to_dict(self):
        return {
            "lower_bound": _ext(self.lower_bound),
            "reference": _ext(self.reference.value),
            "reference_error_bound": self.reference.error_bound,
            "gap": _ext(self.gap),
            "epsilon": self.epsilon,
            "H0": self.H0,
            "K0": self.K0,
            "delta": self.delta,
            "lipschitz": self.lipschitz,
            "tail_gap_low": self.tail_gap_low,
            "tail_gap_high": self.tail_gap_high,
            "m_interior": self.m_interior,
            "m_cells": self.m_cells,
            "certified": self.certified,
        }


def _tail_gap(ng, pair, interval):
    """Divergence lost by collapsing ``interval`` into a single cell."""
    rd = pair.restricted_divergence(ng, interval)
    m = pair.cell_masses(interval)
    jensen = ng.cell_value(m.p, m.r, m.log_p, m.log_r)
    return rd.value - jensen, rd.error_bound


def gyp_approximate(g, pair, epsilon, max_cells=MAX_CELLS):
    """Build a partition whose value is within ``epsilon`` of ``D_f(P, R)``."""
    epsilon = float(epsilon)
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be positive and finite, got {epsilon!r}")
    ng = normalize(g)
    reference = divergence(ng, pair)
    if not reference.finite:
        raise InfiniteDivergenceError(
            f"D_{g.name} is infinite for this pair; use detect_infinite instead"
        )
    if reference.error_bound > epsilon / 10:
        raise AccuracyError(
            f"reference error {reference.error_bound:.3g} exceeds epsilon/10",
            best_estimate=reference,
        )
    target = epsilon / 3.0

    H = 0.5
    while True:
        low_gap, _ = _tail_gap(ng, pair, Interval(-math.inf, math.log(H), True, False))
        if low_gap < target:
            break
        H *= 0.5
        if H < H_FLOOR:
            raise AccuracyError(f"lower tail gap still {low_gap:.3g} at H = {H:.3g}")
    K = 2.0
    while True:
        high_gap, _ = _tail_gap(ng, pair, Interval(math.log(K), math.inf, False, True))
        if high_gap < target:
            break
        K *= 2.0
        if K > K_CAP:
            raise AccuracyError(f"upper tail gap still {high_gap:.3g} at K = {K:.3g}")

    lipschitz = max(abs(subgradient(ng, H)[0]), abs(subgradient(ng, K)[1]))
    width = K - H
    delta = width if lipschitz == 0.0 else target / lipschitz
    # strictly narrower than delta
    m = int(math.floor(width / delta)) + 1
    if m > max_cells:
        raise SizeGuardError(f"certificate needs {m} cells, more than the limit {max_cells}")
    edges = H + width * (np.arange(m + 1) / m)
    edges[0], edges[-1] = H, K
    log_edges = np.log(edges)
    log_lo = np.concatenate(([-np.inf], log_edges[:-1], [log_edges[-1]]))
    log_hi = np.concatenate((log_edges, [np.inf]))
    left_closed = np.ones(m + 2, dtype=bool)
    left_closed[-1] = False
    right_closed = np.zeros(m + 2, dtype=bool)
    right_closed[-2:] = True
    part = Partition(log_lo, log_hi, left_closed, right_closed)

    bound = partition_divergence(ng, pair, part).value
    result = ApproxResult(
        partition=part,
        lower_bound=bound,
        epsilon=epsilon,
        H0=H,
        K0=K,
        delta=delta,
        tail_gap_low=low_gap,
        tail_gap_high=high_gap,
        reference=reference,
        lipschitz=lipschitz,
        m_interior=m,
    )
    if not result.certified:
        raise AccuracyError(
            f"certificate check failed: reference {reference.value!r}, bound {bound!r}",
            best_estimate=reference,
        )
    return result


# --------------------------------------------------------------------------
# infinite divergences


@dataclass(frozen=True)
class EvidenceCell:
    """One cell of the divergence evidence.

    ``side`` is ``"upper"`` (ratio > 1), ``"lower"`` (ratio < 1), ``"zero"``
    or ``"infinity"`` for the two ratio atoms.  ``level`` is ``n`` for a
    level cell ``{n - 1 <= f~(rho) < n}``; it is ``None`` for the atoms and
    for single-atom cells beyond the range where integer levels are exact.
    """

    side: str
    level: object
    interval: Interval
    p: float
    r: float
    value: float


@dataclass(frozen=True)
class InfinityEvidence:
    cells: tuple
    partial_sums: tuple
    thresholds: tuple
    lower_thresholds: tuple
    target: float
    exceeded: bool
    n_used: int

    @property
    def total(self):
        return self.partial_sums[-1] if self.partial_sums else 0.0

    def to_partition(self):
        """The evidence cells completed to a finite partition by the gaps."""
        return Partition.covering([c.interval for c in self.cells])

    def to_dict(self):
        return {
            "target": self.target,
            "exceeded": self.exceeded,
            "n_used": self.n_used,
            "n_cells": len(self.cells),
            "total": _ext(self.total),
            "thresholds": [[n, _ext(b)] for n, b in self.thresholds],
            "lower_thresholds": [[n, c] for n, c in self.lower_thresholds],
        }


class _Side:
    """Walks the level cells on one side of ratio 1."""

    def __init__(self, ng, pair, upper):
        self.ng = ng
        self.pair = pair
        self.upper = upper
        self.done = False
        self.level = 0
        # boundary of the region still to be covered, in log ratio
        self.edge = 0.0
        self.edge_closed = False
        self.thresholds = []
        self._singles = None
        if pair.is_atomic:
            keys = pair.sorted_atoms()[0]
            finite = np.isfinite(keys)
            self._keys = keys
            idx = np.flatnonzero(finite & ((keys > 0) if upper else (keys < 0)))
            self._idx = idx if upper else idx[::-1]
            self._pos = 0
            lo_r, hi_r = 1.0, 1.0
        else:
            lo_r, hi_r = pair.ratio_range
        self._range_end = math.log(hi_r) if upper else (math.log(lo_r) if lo_r > 0 else -math.inf)

    def _threshold(self, n):
        if n == 0:
            return 1.0
        if self.upper:
            return level_threshold(self.ng, n)
        c = lower_level_threshold(self.ng, n)
        return 0.0 if c is None else c

    def _level_cell(self, n, anchor=None):
        prev, nxt = self._threshold(n - 1), self._threshold(n)
        self.thresholds.append((n, nxt))
        if self.upper:
            lo = 0.0 if n == 1 else math.log(prev)
            if anchor is not None:
                lo = min(lo, anchor)
            if nxt == math.inf:
                self.done = True
                return Interval(lo, math.inf, n != 1, False)
            return Interval(lo, math.log(nxt), n != 1, False)
        hi = 0.0 if n == 1 else math.log(prev)
        if anchor is not None:
            hi = max(hi, anchor)
        if nxt <= 0.0:
            self.done = True
            return Interval(-math.inf, hi, False, n != 1)
        return Interval(math.log(nxt), hi, False, n != 1)

    def step(self):
        """Next cell as ``(level, interval, masses[, value])``, or None when finished."""
        if self.done:
            return None
        if self.pair.is_atomic:
            return self._atomic_step()
        self.level += 1
        if (self.upper and self.edge >= self._range_end) or (
                not self.upper and self.edge <= self._range_end):
            self.done = True
            return None
        cell = self._level_cell(self.level)
        self.edge = cell.log_hi if self.upper else cell.log_lo
        return self.level, cell, self.pair.cell_masses(cell)

    def _atomic_step(self):
        if self._pos >= len(self._idx):
            self.done = True
            return None
        j = self._idx[self._pos]
        key = float(self._keys[j])
        with np.errstate(over="ignore"):
            rho = math.exp(key) if key < 709.0 else math.inf
        f_val = eval_generator(self.ng, rho) if math.isfinite(rho) else math.inf
        if f_val < _LEVEL_EXACT:
            n = max(int(math.floor(f_val)) + 1, self.level + 1)
            cell = self._level_cell(n, anchor=key)
            self.level = n
            inside = cell.contains(self._keys[self._idx[self._pos:]])
            # atoms of this cell are consecutive from the current position
            stop = np.argmin(inside) if not inside.all() else len(inside)
            self._pos += max(int(stop), 1)
            return n, cell, self.pair.cell_masses(cell)
        if self._singles is None:
            rest = self._idx[self._pos:]
            _, sp, sr, slp, slr = self.pair.sorted_atoms()
            self._singles = (self._pos, sp, sr, slp, slr,
                             self.ng.perspective(sp[rest], sr[rest], slp[rest], slr[rest]))
        start, sp, sr, slp, slr, vals = self._singles
        self._pos += 1
        cell = Interval(key, key, True, True)
        masses = CellMass(float(sp[j]), float(sr[j]), float(slp[j]), float(slr[j]))
        return None, cell, masses, float(vals[self._pos - 1 - start])


def detect_infinite(g, pair, M, n_max):
    """Accumulate level-cell contributions until they exceed ``M``.

    Each round adds one cell above ratio 1 and one below; the atoms at
    ratio 0 and +inf come first as cells of their own.  ``exceeded`` is a
    certificate that some finite partition has value above ``M``; running
    out of rounds (``n_max``) or cells leaves it ``False``, which is
    inconclusive rather than a proof of finiteness.
    """
    M = float(M)
    if not M > 0:
        raise DomainError(f"target M must be positive, got {M!r}")
    n_max = int(n_max)
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    ng = normalize(g)

    cells = []
    sums = []
    total = 0.0

    def add(side, level, interval, masses, value=None):
        nonlocal total
        if value is None:
            value = ng.cell_value(masses.p, masses.r, masses.log_p, masses.log_r)
        total += value
        cells.append(EvidenceCell(side, level, interval, masses.p, masses.r, value))
        sums.append(total)

    for side, interval in (("zero", Interval(-math.inf, -math.inf, True, True)),
                           ("infinity", Interval(math.inf, math.inf, True, True))):
        m = pair.cell_masses(interval)
        if m.log_p > -math.inf or m.log_r > -math.inf:
            add(side, None, interval, m)

    upper = _Side(ng, pair, upper=True)
    lower = _Side(ng, pair, upper=False)
    rounds = 0
    while total <= M and rounds < n_max and not (upper.done and lower.done):
        rounds += 1
        for walker, name in ((upper, "upper"), (lower, "lower")):
            out = walker.step()
            if out is not None:
                add(name, *out)
    return InfinityEvidence(
        cells=tuple(cells),
        partial_sums=tuple(sums),
        thresholds=tuple(upper.thresholds),
        lower_thresholds=tuple(lower.thresholds),
        target=M,
        exceeded=total > M,
        n_used=rounds,
    )


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    m_cells: int
    lower_bound: float
    gap: float


def convergence_sweep(g, pair, epsilons):
    """One certificate per epsilon, rows ordered by epsilon descending.

    Equal-width grids for different epsilons are not nested, so each row
    reports the common refinement of its certificate with the previous
    row's partition.  The bound can only grow under refinement, hence the
    gaps never increase down the table, and every row still satisfies its
    own certificate.
    """
    eps = sorted((float(e) for e in epsilons), reverse=True)
    if not eps or any(not (e > 0) for e in eps):
        raise DomainError("epsilons must be a non-empty list of positive numbers")
    ng = normalize(g)
    rows = []
    previous = None
    for e in eps:
        res = gyp_approximate(g, pair, e)
        part = res.partition if previous is None else common_refinement(previous, res.partition)
        bound = partition_divergence(ng, pair, part).value
        rows.append(SweepRow(e, len(part), bound, res.reference.value - bound))
        previous = part
    return rows
