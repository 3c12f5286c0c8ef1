"""Adaptive integration over the half line.

The radial integrals behind K_g are integrated piecewise on
[0, R], [R, 2R], [2R, 4R], ... with Gauss-Kronrod on every piece. Once
successive pieces shrink geometrically (exponential tails shrink faster,
power tails r^-p shrink by 2^(1-p)), the rest is extrapolated as a
geometric series. Pieces that stop shrinking far out are reported as
divergence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DivergenceError

# doublings after which a non-shrinking piece counts as divergence
_DIVERGENCE_DOUBLINGS = 60
_MAX_DOUBLINGS = 400


@dataclass
class QuadInfo:
    abserr: float
    evaluations: int
    radius: float


def _quad(f, a, b, points, epsabs, epsrel, limit=200):
    pts = [p for p in points if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(f, a, b, points=pts, epsabs=epsabs, epsrel=epsrel,
                                        limit=limit, full_output=True)[:3]
    return val, err, info["neval"]


def radial_integral(f, *, breaks=(), r0: float = 1.0, epsrel: float = 1e-10,
                    epsabs: float = 0.0, tail_fraction: float = 1e-3) -> tuple[float, QuadInfo]:
    """Integrate a nonnegative function over [0, inf).

    Parameters
    ----------
    f : callable
        Scalar integrand.
    breaks : sequence of float
        Known kinks or discontinuities of ``f`` (support edges).
    r0 : float
        Length of the first piece; should be comparable to the bulk scale.
    tail_fraction : float
        Truncation stops when the extrapolated remainder is below this
        fraction of the requested absolute tolerance.

    Returns
    -------
    value, QuadInfo
    """
    breaks = sorted(b for b in np.asarray(breaks, dtype=float).ravel() if b > 0 and math.isfinite(b))
    R = max(float(r0), (breaks[-1] * 1.0001) if breaks else 0.0)
    total, err, neval = _quad(f, 0.0, R, breaks, epsabs, epsrel)
    prev = None
    for j in range(_MAX_DOUBLINGS):
        tol = max(epsabs, epsrel * abs(total))
        piece, perr, pn = _quad(f, R, 2.0 * R, breaks, 1e-3 * tol, epsrel)
        total += piece
        err += perr
        neval += pn
        R *= 2.0
        tol = max(epsabs, epsrel * abs(total))
        if piece == 0.0:
            if prev == 0.0 or prev is None:
                # no mass on two consecutive shells (compact support) or none at all
                if not breaks or R > breaks[-1]:
                    return total, QuadInfo(err, neval, R)
        if prev is not None and prev > 0.0 and piece >= 0.0:
            ratio = piece / prev
            if ratio < 1.0:
                remainder = piece * ratio / (1.0 - ratio)
                if remainder <= tail_fraction * tol or (ratio < 0.5 and piece <= tail_fraction * tol):
                    return total + remainder, QuadInfo(err + remainder, neval, R)
            elif j >= _DIVERGENCE_DOUBLINGS:
                raise DivergenceError(
                    f"radial integrand is not decaying: shell mass ratio {ratio:.3g} at r={R:.3g}")
        prev = piece
    raise DivergenceError(f"radial integral did not converge by r={R:.3g}")


def finite_integral(f, a: float, b: float, *, points=(), epsrel: float = 1e-10,
                    epsabs: float = 0.0, limit: int = 200) -> tuple[float, float, int]:
    """Gauss-Kronrod on a finite interval with optional break points."""
    return _quad(f, a, b, list(points), epsabs, epsrel, limit)
