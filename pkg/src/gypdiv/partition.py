"""Finite partitions of the ratio axis and the discretized divergence.

A partition here is a tiling of ``[0, +inf]`` by ratio intervals; through
``x -> p(x)/r(x)`` it induces a finite measurable partition of the sample
space.  The cells are stored as four parallel arrays so that the very fine
partitions produced by the certificate builder stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DomainError, SizeGuardError
from .measure import DiscretePair, DivergenceValue, Interval

__all__ = [
    "BruteForceResult",
    "Partition",
    "brute_force_supremum",
    "coarsen",
    "common_refinement",
    "merge",
    "partition_divergence",
    "refine",
    "renyi_partition_bound",
    "restricted_growth_strings",
]

BRUTE_FORCE_MAX_ATOMS = 12


@dataclass(frozen=True, eq=False)
class Partition:
    log_lo: np.ndarray
    log_hi: np.ndarray
    left_closed: np.ndarray
    right_closed: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a) for a in (self.log_lo, self.log_hi,
                                          self.left_closed, self.right_closed)]
        n = len(arrays[0])
        if n < 1 or any(len(a) != n for a in arrays):
            raise DomainError("a partition needs at least one cell and matching arrays")
        lo = arrays[0].astype(float)
        hi = arrays[1].astype(float)
        lc = arrays[2].astype(bool)
        rc = arrays[3].astype(bool)
        for name, value in zip(("log_lo", "log_hi", "left_closed", "right_closed"),
                               (lo, hi, lc, rc)):
            value.flags.writeable = False
            object.__setattr__(self, name, value)
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise DomainError("partition has a malformed cell")
        if not (lo[0] == -np.inf and lc[0] and hi[-1] == np.inf and rc[-1]):
            raise DomainError("partition must cover [0, +inf] including both endpoints")
        if n > 1:
            touching = hi[:-1] == lo[1:]
            exclusive = rc[:-1] != lc[1:]
            if not (np.all(touching) and np.all(exclusive)):
                raise DomainError("partition cells must be disjoint and leave no gaps")
        # a degenerate cell must be the closed point
        point = lo == hi
        if np.any(point & ~(lc & rc)):
            raise DomainError("partition contains an empty cell")

    @classmethod
    def from_intervals(cls, intervals):
        intervals = list(intervals)
        return cls(
            np.array([c.log_lo for c in intervals], dtype=float),
            np.array([c.log_hi for c in intervals], dtype=float),
            np.array([c.left_closed for c in intervals], dtype=bool),
            np.array([c.right_closed for c in intervals], dtype=bool),
        )

    @classmethod
    def from_cuts(cls, cuts, split_zero=False, split_infinity=False):
        """Cells ``[0, c1), [c1, c2), ..., [ck, +inf]``.

        ``split_zero`` / ``split_infinity`` carve out the atoms ``{0}`` and
        ``{+inf}`` as cells of their own.
        """
        cuts = [float(c) for c in cuts]
        if any(not (0 < c < math.inf) for c in cuts):
            raise DomainError("cuts must be finite and positive")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise DomainError("cuts must be strictly increasing")
        logs = [math.log(c) for c in cuts]
        if any(b <= a for a, b in zip(logs, logs[1:])):
            raise DomainError("cuts are too close to separate in log-ratio space")
        lo = [-math.inf] + logs
        hi = logs + [math.inf]
        n = len(lo)
        lc = [True] * n
        rc = [False] * (n - 1) + [True]
        if split_zero:
            lo, hi = [-math.inf] + lo, [-math.inf] + hi
            lc, rc = [True, False] + lc[1:], [True] + rc
        if split_infinity:
            lo, hi = lo + [math.inf], hi + [math.inf]
            rc = rc[:-1] + [False, True]
            lc = lc + [True]
        return cls(np.array(lo), np.array(hi), np.array(lc), np.array(rc))

    @classmethod
    def trivial(cls):
        return cls.from_cuts([])

    @classmethod
    def covering(cls, cells):
        """Complete disjoint intervals to a partition by adding the gaps.

        ``cells`` must be pairwise disjoint; they are sorted first.
        """
        cells = sorted((c for c in cells if not c.is_empty), key=lambda c: (c.log_lo, not c.left_closed))
        out = []
        pos, pos_closed = -math.inf, True  # next uncovered point, included?
        for c in cells:
            if (c.log_lo, not c.left_closed) < (pos, not pos_closed):
                raise DomainError("cells overlap")
            if c.log_lo > pos or (c.log_lo == pos and pos_closed and not c.left_closed):
                out.append(Interval(pos, c.log_lo, pos_closed, not c.left_closed))
            out.append(c)
            pos, pos_closed = c.log_hi, not c.right_closed
        if pos < math.inf or pos_closed:
            if not (pos == math.inf and not pos_closed):
                out.append(Interval(pos, math.inf, pos_closed, True))
        return cls.from_intervals(out)

    def __len__(self):
        return len(self.log_lo)

    def cell(self, k):
        return Interval(float(self.log_lo[k]), float(self.log_hi[k]),
                        bool(self.left_closed[k]), bool(self.right_closed[k]))

    @property
    def cells(self):
        return [self.cell(k) for k in range(len(self))]

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.cells)

    @property
    def cuts(self):
        """Finite interior cut points in ratio space."""
        inner = self.log_hi[:-1]
        return [math.exp(x) for x in inner if math.isfinite(x)]

    def masses(self, pair):
        return pair.partition_masses(self.log_lo, self.log_hi,
                                     self.left_closed, self.right_closed)

    def __eq__(self, other):
        if not isinstance(other, Partition) or len(self) != len(other):
            return NotImplemented if not isinstance(other, Partition) else False
        return all(np.array_equal(a, b) for a, b in (
            (self.log_lo, other.log_lo), (self.log_hi, other.log_hi),
            (self.left_closed, other.left_closed), (self.right_closed, other.right_closed)))

    def __repr__(self):
        if len(self) <= 8:
            return "Partition(" + ", ".join(str(c) for c in self.cells) + ")"
        return f"Partition(<{len(self)} cells>)"


def partition_divergence(g, pair, part):
    """``sum_k R(E_k) f(P(E_k) / R(E_k))`` over the cells of ``part``."""
    p, r, lp, lr = part.masses(pair)
    vals = g.perspective(p, r, lp, lr)
    return DivergenceValue(float(np.sum(vals)), 0.0)


def coarsen(pair, part):
    """The discrete pair of cell masses ``(P(E_k)), (R(E_k))``."""
    p, r, lp, lr = part.masses(pair)
    return DiscretePair(p, r, lp, lr)


def refine(part, cell_index, split_point):
    """Split one cell at an interior ratio ``split_point``.

    The left piece keeps the cell's left end and is open at the split; the
    right piece starts closed at the split and keeps the cell's right end.
    """
    k = int(cell_index)
    if not 0 <= k < len(part):
        raise DomainError(f"no cell {k} in a partition of {len(part)} cells")
    s = float(split_point)
    if not (0 < s < math.inf):
        raise DomainError(f"split point must be finite and positive, got {s!r}")
    t = math.log(s)
    lo, hi = part.log_lo[k], part.log_hi[k]
    if not lo < t < hi:
        raise DomainError(f"split point {s!r} is not interior to cell {part.cell(k)}")
    return Partition(
        np.insert(part.log_lo, k + 1, t),
        np.insert(part.log_hi, k, t),
        np.insert(part.left_closed, k + 1, True),
        np.insert(part.right_closed, k, False),
    )


def merge(part, cell_index):
    """Merge cell ``cell_index`` with its right neighbour (inverse of refine)."""
    k = int(cell_index)
    if not 0 <= k < len(part) - 1:
        raise DomainError(f"cell {k} has no right neighbour")
    return Partition(
        np.delete(part.log_lo, k + 1),
        np.delete(part.log_hi, k),
        np.delete(part.left_closed, k + 1),
        np.delete(part.right_closed, k),
    )


def common_refinement(a, b):
    """The coarsest partition refining both ``a`` and ``b``.

    Each interior boundary is a point ``t`` plus the side it belongs to;
    the union of both boundary sets defines the cells.  When ``t`` is a
    boundary on both sides, the point ``{t}`` becomes a cell of its own.
    """
    t = np.concatenate((a.log_hi[:-1], b.log_hi[:-1]))
    closed = np.concatenate((a.right_closed[:-1], b.right_closed[:-1]))
    # at a shared point, "t goes right" sorts before "t goes left"
    order = np.lexsort((closed, t))
    t, closed = t[order], closed[order]
    if t.size:
        keep = np.ones(t.size, dtype=bool)
        keep[1:] = (t[1:] != t[:-1]) | (closed[1:] != closed[:-1])
        t, closed = t[keep], closed[keep]
    log_lo = np.concatenate(([-np.inf], t))
    log_hi = np.concatenate((t, [np.inf]))
    lc = np.concatenate(([True], ~closed))
    rc = np.concatenate((closed, [True]))
    return Partition(log_lo, log_hi, lc, rc)


def renyi_partition_bound(alpha, pair, part):
    """``(alpha - 1)^-1 ln sum_k P(E_k)^alpha / R(E_k)^(alpha - 1)``."""
    alpha = float(alpha)
    if not alpha > 0 or alpha == 1.0 or not math.isfinite(alpha):
        raise DomainError(f"order must be > 0 and != 1, got {alpha!r}")
    p, r, lp, lr = part.masses(pair)
    total = 0.0
    for pk, rk, lpk, lrk in zip(p, r, lp, lr):
        if lpk == -math.inf:
            continue
        if lrk == -math.inf:
            if alpha > 1:
                return math.inf
            continue
        if pk > 0 and rk > 0:
            total += pk**alpha * rk ** (1.0 - alpha)
        else:
            total += math.exp(alpha * lpk + (1.0 - alpha) * lrk)
    if total == math.inf:
        return math.inf
    if total <= 0.0:
        return math.inf if alpha < 1 else -math.inf
    return math.log(total) / (alpha - 1.0)


# --------------------------------------------------------------------------
# brute-force oracle


def restricted_growth_strings(n):
    """Yield every restricted growth string of length ``n`` (one per set partition).

    ``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``.  Strings come out in
    lexicographic order, so the all-zero string (one block) is first and
    ``0, 1, ..., n-1`` (singletons) is last.
    """
    if n <= 0:
        yield ()
        return
    a = [0] * n
    m = [0] * n  # m[i] = max(a[:i+1])
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0 and a[i] == m[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        m[i] = max(m[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            m[j] = m[i]


@dataclass(frozen=True)
class BruteForceResult(DivergenceValue):
    """Supremum over all set partitions, with a maximizing partition.

    ``argmax`` lists blocks of atom indices (into the input vectors).
    """

    argmax: tuple = ()
    n_partitions: int = 0


def brute_force_supremum(g, pair):
    """Maximize the partition value over every set partition of the support."""
    if not isinstance(pair, DiscretePair):
        raise DomainError("the brute-force oracle needs a discrete pair")
    atoms = pair.support
    n = len(atoms)
    if n > BRUTE_FORCE_MAX_ATOMS:
        raise SizeGuardError(
            f"support has {n} atoms; exhaustive search is limited to {BRUTE_FORCE_MAX_ATOMS}"
        )
    p = pair.p_vector[atoms]
    r = pair.r_vector[atoms]
    best = -math.inf
    best_rgs = None
    count = 0
    for rgs in restricted_growth_strings(n):
        count += 1
        k = max(rgs) + 1 if rgs else 0
        bp = np.zeros(k)
        br = np.zeros(k)
        np.add.at(bp, list(rgs), p)
        np.add.at(br, list(rgs), r)
        value = float(np.sum(g.perspective(bp, br)))
        if value > best:
            best, best_rgs = value, rgs
    blocks = {}
    for atom, label in zip(atoms, best_rgs or ()):
        blocks.setdefault(label, []).append(int(atom))
    argmax = tuple(tuple(b) for _, b in sorted(blocks.items()))
    if n == 0:
        best = 0.0
    return BruteForceResult(best, 0.0, argmax=argmax, n_partitions=count)
