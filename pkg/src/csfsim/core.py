"""Contest success functions mapping season run totals to win percentage.

Two families are supported:

* Tullock (ratio) form, ``rs**a / (rs**a + ra**a)``. Bill James's
  Pythagorean expectation is the special case ``a = 2``.
* Difference form, ``1 / (1 + exp(b * (ra - rs)))``.

Both are evaluated as a logistic of a log-odds score, which is exact and
keeps large exponents from overflowing. Every function accepts scalars or
numpy arrays; scalars in give a Python float back.
"""

from __future__ import annotations

import numpy as np

JAMES_EXPONENT = 2.0

# Largest double below 1. The logistic is capped here so probabilities
# never collapse to exactly 1 (the lower tail stays representable down to
# exp(-745) on its own).
_ONE_MINUS = float(np.nextafter(1.0, 0.0))


class DomainError(ValueError):
    """Raised when an argument lies outside a function's domain."""


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def _require_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return arr


def logistic(z):
    """Numerically stable ``1 / (1 + exp(-z))``, strictly inside (0, 1)."""
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    p = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return _out(np.minimum(p, _ONE_MINUS))


def tullock_win_pct(rs, ra, alpha):
    """Tullock-form expected win percentage.

    Parameters
    ----------
    rs, ra
        Season runs scored and allowed; must be > 0.
    alpha
        Noise exponent (> 0). Smaller values mean a noisier contest.
    """
    rs = _require_positive("rs", rs)
    ra = _require_positive("ra", ra)
    alpha = _require_positive("alpha", alpha)
    return logistic(alpha * np.log(rs / ra))


def james_win_pct(rs, ra):
    """Pythagorean expectation with the exponent fixed at 2."""
    return tullock_win_pct(rs, ra, JAMES_EXPONENT)


def difference_win_pct(rs, ra, beta):
    """Difference-form expected win percentage, logistic in ``rs - ra``.

    ``beta`` is the log-odds change per run of season run differential.
    """
    rs = _require_positive("rs", rs)
    ra = _require_positive("ra", ra)
    beta = _require_positive("beta", beta)
    return logistic(beta * (rs - ra))


def win_pct(form, rs, ra, param):
    """Dispatch on ``form`` ('tullock' or 'difference')."""
    if form == "tullock":
        return tullock_win_pct(rs, ra, param)
    if form == "difference":
        return difference_win_pct(rs, ra, param)
    raise ValueError(f"unknown CSF form {form!r}")


def expected_wins(p, games):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError(f"win probability must lie in (0, 1), got {p!r}")
    if int(games) != games or games < 1:
        raise DomainError(f"games must be a positive integer, got {games!r}")
    return _out(p * games)


def luck(actual_wins, expected_wins):
    """Wins above (positive) or below (negative) expectation."""
    return _out(np.asarray(actual_wins, dtype=float) - expected_wins)
