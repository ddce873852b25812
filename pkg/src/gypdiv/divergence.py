"""Reference values of f-divergences, Tsallis and Renyi divergences."""

from __future__ import annotations

import math

from .errors import DomainError
from .generator import tsallis_generator
from .measure import DivergenceValue, Interval

__all__ = [
    "divergence",
    "renyi",
    "renyi_from_tsallis",
    "tsallis",
    "tsallis_from_renyi",
]


def divergence(g, pair):
    """``D_f(P, R)`` including the atoms at ratio 0 and ratio +inf.

    ``f(0) R(p = 0)`` and ``f'(inf) P(r = 0)`` are added exactly; an infinite
    slope against a positive singular mass gives ``inf`` whatever the rest
    of the integral is.
    """
    return pair.restricted_divergence(g, Interval.full())


def _check_order(alpha):
    alpha = float(alpha)
    if not alpha > 0 or alpha == 1.0 or not math.isfinite(alpha):
        raise DomainError(
            f"order must be > 0 and != 1, got {alpha!r}; request 'kl' for the limit"
        )
    return alpha


def tsallis(alpha, pair):
    """Tsallis divergence of order ``alpha``."""
    return divergence(tsallis_generator(_check_order(alpha)), pair)


def renyi_from_tsallis(alpha, t):
    """``(alpha - 1)^-1 ln[1 + (alpha - 1) t]`` with +inf where the log argument hits 0."""
    alpha = _check_order(alpha)
    if t == math.inf:
        return math.inf
    arg = (alpha - 1.0) * t
    if arg <= -1.0:
        return math.inf
    return math.log1p(arg) / (alpha - 1.0)


def tsallis_from_renyi(alpha, value):
    """Inverse of :func:`renyi_from_tsallis`."""
    alpha = _check_order(alpha)
    if value == math.inf:
        return math.inf if alpha > 1 else 1.0 / (1.0 - alpha)
    return math.expm1((alpha - 1.0) * value) / (alpha - 1.0)


def renyi(alpha, pair):
    """Renyi divergence of order ``alpha`` in nats, via the Tsallis value."""
    alpha = _check_order(alpha)
    t = tsallis(alpha, pair)
    value = renyi_from_tsallis(alpha, t.value)
    err = 0.0
    if t.error_bound and math.isfinite(value):
        # derivative of the transform is 1 / (1 + (alpha - 1) t)
        err = t.error_bound / max(1.0 + (alpha - 1.0) * t.value, 1e-300)
    return DivergenceValue(value, err)
