"""Reference survival functions and the shrinking-ball constants.

All tail probabilities go through the regularised incomplete beta
function, so ``t_tail(k, u) == 0.5 * f_tail(1, k, u**2)`` holds to rounding
for ``u > 0``.

The shrinking-ball quantities describe

    F(u) = integral of G over the ball ||x|| < 1/u in R^k

against ``f(u) = F_{m,k}(u**2) / alpha``. ``alpha = 2, m = 1`` turns
``f`` into the Student tail ``t_k(u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ExpansionDomainError


def t_tail(k: float, u):
    """Upper tail P(T_k > u) of Student's t with ``k`` degrees of freedom.

    ``k`` may be an array broadcasting against ``u`` (Welch's per-sample d.f.).
    """
    if np.any(np.asarray(k) < 1):
        raise ValueError(f"degrees of freedom must be >= 1, got {k}")
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = k / (k + u * u)
        half = 0.5 * special.betainc(0.5 * k, 0.5, x)
    out = np.where(u >= 0, half, 1.0 - half)
    return float(out) if out.ndim == 0 else out


def f_tail(m: float, k: float, u):
    """Upper tail P(F_{m,k} > u) of Fisher's F distribution."""
    if m < 1 or k < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got ({m}, {k})")
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("f_tail is defined for u >= 0 only")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = special.betainc(0.5 * k, 0.5 * m, k / (k + m * u))
    return float(out) if out.ndim == 0 else out


def _lead_coefficient(m, k, alpha):
    return 2.0 * (k / m) ** (0.5 * k) / (alpha * k * special.beta(0.5 * m, 0.5 * k))


def f_tail_expansion(m: float, k: float, alpha: float, u: float) -> float:
    """Two-term asymptote of ``F_{m,k}(u**2) / alpha`` as ``u -> inf``.

    Raises :class:`ExpansionDomainError` when the correction term is not
    smaller than the leading one.
    """
    a2 = k * k * (k + m) / (2.0 * m * (k + 2.0))
    lead = u ** (-k)
    corr = a2 * u ** (-(k + 2.0))
    if not corr < lead:
        raise ExpansionDomainError(
            f"u={u:g} is too small for the two-term expansion (needs u^2 > {a2:g})")
    return _lead_coefficient(m, k, alpha) * (lead - corr)


def vol_unit_ball(k: int) -> float:
    """Volume of the unit ball in R^k."""
    if k < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (0.5 * k) / math.gamma(0.5 * k + 1.0)


@dataclass(frozen=True)
class ShrinkBallContext:
    """Local description of G near the origin of R^k.

    ``grad_sup_norm`` is the sup of ||grad G|| over the ball of interest and
    ``hess_trace`` the Laplacian of G at 0; both are supplied by the caller.
    """

    k: int
    m: float
    alpha: float
    G0: float
    grad_sup_norm: float = 0.0
    hess_trace: float = 0.0

    def __post_init__(self):
        if self.k < 1 or self.m < 1 or self.alpha not in (1, 2):
            raise ValueError(f"need k>=1, m>=1, alpha in {{1,2}}; got {self}")

    @property
    def C1(self) -> float:
        return vol_unit_ball(self.k)

    @property
    def C2(self) -> float:
        k, m = self.k, self.m
        return (k * (k + m) / (m * (k + 2.0))) * (k / m) ** (0.5 * k) / special.beta(0.5 * m, 0.5 * k)


def shrink_ball_K(ctx: ShrinkBallContext) -> float:
    """Limit of F(u)/f(u): proportional to G(0), linear in alpha."""
    k, m = ctx.k, ctx.m
    pref = ctx.alpha * k * special.beta(0.5 * m, 0.5 * k) / (2.0 * (k / m) ** (0.5 * k))
    return float(pref * vol_unit_ball(k) * ctx.G0)


def shrink_ball_bound(ctx: ShrinkBallContext, u: float) -> float:
    """Upper bound on |F(u) - K f(u)| valid for every u > 0."""
    k = ctx.k
    K = shrink_ball_K(ctx)
    return float(ctx.C1 * u ** (-(k + 1.0)) * ctx.grad_sup_norm
                 + ctx.C2 * (K / ctx.alpha) * u ** (-(k + 2.0)))


def shrink_ball_second_order(ctx: ShrinkBallContext) -> float:
    """Limit of u^(k+2) (F(u) - K f(u)).

    Both contributions enter with a plus sign: the curvature of G adds mass
    to the ball and the negative second term of the F-tail expansion is
    subtracted.
    """
    K = shrink_ball_K(ctx)
    return float(ctx.C1 * ctx.hess_trace / (2.0 * (ctx.k + 2.0)) + ctx.C2 * K / ctx.alpha)


@dataclass(frozen=True)
class ReferenceTail:
    """Nominal null tail of a statistic: Student ``t_k`` or Fisher ``F_{m,k}``.

    ``alpha`` is the shrinking-ball scaling exponent: 2 for t-based tests,
    1 for the F test.
    """

    kind: str
    k: int
    m: int = 1

    def __post_init__(self):
        if self.kind not in ("student-t", "fisher-f"):
            raise ValueError(f"unknown reference tail kind {self.kind!r}")
        if self.k < 1 or self.m < 1:
            raise ValueError("degrees of freedom must be >= 1")

    @property
    def alpha(self) -> int:
        return 2 if self.kind == "student-t" else 1

    def survival(self, u):
        if self.kind == "student-t":
            return t_tail(self.k, u)
        return f_tail(self.m, self.k, u)
