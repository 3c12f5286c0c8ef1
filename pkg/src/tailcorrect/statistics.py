"""The t, Welch and F statistics and their raw and corrected p-values.

All p-values are one-sided upper tails P(T > t*). Sample variances use the
n - 1 divisor. Each statistic has a scalar form returning a
:class:`StatisticValue` and a batch form over the rows of a matrix, used by
the simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, SpecError
from .kg.spec import KgResult, TestSpec
from .tails import t_tail


@dataclass(frozen=True)
class StatisticValue:
    t_star: float
    spec: TestSpec
    welch_df: float | None = None
    degenerate: bool = False

    def to_json(self) -> dict:
        out = {"t_star": self.t_star, **self.spec.to_json()}
        if self.welch_df is not None:
            out["welch_df"] = self.welch_df
        return out


@dataclass(frozen=True)
class PValuePair:
    p_raw: float
    p_corrected: float
    p_welch: float | None = None

    @property
    def outside_regime(self) -> bool:
        """True when K_g * p_raw exceeds 1, i.e. t* is not in the tail."""
        return self.p_corrected > 1.0

    def to_json(self) -> dict:
        out = {"p_raw": self.p_raw, "p_corrected": self.p_corrected}
        if self.p_welch is not None:
            out["p_welch"] = self.p_welch
        out["outside_approximation_regime"] = self.outside_regime
        return out


def _vector(x, name, min_len=2):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < min_len:
        raise SpecError(f"{name} must be a 1-D sample of length >= {min_len}")
    return x


# ---------------------------------------------------------------- batch forms


def ost_batch(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One-sample t for each row; returns (T, degenerate mask)."""
    n = X.shape[-1]
    s = X.std(axis=-1, ddof=1)
    bad = ~(s > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = math.sqrt(n) * X.mean(axis=-1) / s
    return t, bad


def tst_batch(X: np.ndarray, Y: np.ndarray, alpha: float, beta: float):
    """Weighted two-sample t for paired rows; returns (T, degenerate mask, S1^2, S2^2)."""
    v1 = X.var(axis=-1, ddof=1)
    v2 = Y.var(axis=-1, ddof=1)
    den = np.sqrt(alpha * v1 + beta * v2)
    bad = ~(den > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (X.mean(axis=-1) - Y.mean(axis=-1)) / den
    return t, bad, v1, v2


def welch_df_batch(v1, v2, n1: int, n2: int):
    a, b = v1 / n1, v2 / n2
    with np.errstate(divide="ignore", invalid="ignore"):
        return (a + b) ** 2 / (a * a / (n1 - 1) + b * b / (n2 - 1))


def f_batch(X: np.ndarray, Y: np.ndarray):
    v1 = X.var(axis=-1, ddof=1)
    v2 = Y.var(axis=-1, ddof=1)
    bad = ~(v2 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return v1 / v2, bad


def statistic_batch(spec: TestSpec, data: np.ndarray):
    """Statistic of every row of ``data`` (shape (N, n)).

    Returns ``(T, degenerate_mask, welch_df_or_None)``.
    """
    if data.shape[-1] != spec.n:
        raise SpecError(f"rows have length {data.shape[-1]}, test needs {spec.n}")
    if spec.kind == "ost":
        t, bad = ost_batch(data)
        return t, bad, None
    X, Y = data[:, : spec.n1], data[:, spec.n1:]
    if spec.kind == "f":
        t, bad = f_batch(X, Y)
        return t, bad, None
    a, b = spec.weights
    t, bad, v1, v2 = tst_batch(X, Y, a, b)
    df = welch_df_batch(v1, v2, spec.n1, spec.n2) if spec.kind == "welch" else None
    return t, bad, df


# --------------------------------------------------------------- scalar forms


def ost_statistic(x) -> StatisticValue:
    """sqrt(n) * mean / sample standard deviation."""
    x = _vector(x, "x")
    t, bad = ost_batch(x)
    if bad:
        raise DegenerateSampleError("sample has zero variance")
    return StatisticValue(float(t), TestSpec.ost(x.size))


def tst_statistic(x, y, alpha: float | None = None, beta: float | None = None, *,
                  kind: str = "tst") -> StatisticValue:
    """Difference of means over sqrt(alpha S1^2 + beta S2^2).

    Without explicit weights the Student (``kind="tst"``) or Welch
    (``kind="welch"``) weights for the sample sizes are used.
    """
    x, y = _vector(x, "x"), _vector(y, "y")
    spec = TestSpec(kind, n1=x.size, n2=y.size)
    if spec.kind not in ("tst", "welch"):
        raise SpecError("tst_statistic needs kind 'tst' or 'welch'")
    if alpha is None or beta is None:
        alpha, beta = spec.weights
    if not (alpha > 0 and beta > 0):
        raise SpecError("variance weights must be positive")
    t, bad, v1, v2 = tst_batch(x, y, alpha, beta)
    if bad:
        raise DegenerateSampleError("both samples have zero variance")
    df = welch_df(float(v1), float(v2), x.size, y.size) if spec.kind == "welch" else None
    return StatisticValue(float(t), spec, df)


def welch_statistic(x, y) -> StatisticValue:
    return tst_statistic(x, y, kind="welch")


def welch_df(s1sq: float, s2sq: float, n1: int, n2: int) -> float:
    """Welch-Satterthwaite degrees of freedom."""
    if s1sq < 0 or s2sq < 0:
        raise ValueError("variances must be nonnegative")
    if s1sq + s2sq == 0:
        raise DegenerateSampleError("both sample variances are zero")
    return float(welch_df_batch(np.float64(s1sq), np.float64(s2sq), n1, n2))


def f_statistic(x, y) -> StatisticValue:
    """Ratio of sample variances S1^2 / S2^2."""
    x, y = _vector(x, "x"), _vector(y, "y")
    t, bad = f_batch(x, y)
    if bad:
        raise DegenerateSampleError("second sample has zero variance")
    return StatisticValue(float(t), TestSpec.f(x.size, y.size))


def compute_statistic(spec: TestSpec, data) -> StatisticValue:
    """Statistic for ``spec`` from a single concatenated data vector."""
    data = np.asarray(data, dtype=float).reshape(-1)
    if data.size != spec.n:
        raise SpecError(f"expected {spec.n} observations, got {data.size}")
    if spec.kind == "ost":
        return ost_statistic(data)
    x, y = data[: spec.n1], data[spec.n1:]
    if spec.kind == "f":
        return f_statistic(x, y)
    return tst_statistic(x, y, kind=spec.kind)


# ------------------------------------------------------------------ p-values


def raw_pvalues(spec: TestSpec, t) -> np.ndarray:
    """Upper-tail probabilities of the nominal reference distribution."""
    t = np.asarray(t, dtype=float)
    if spec.kind == "f":
        return spec.reference.survival(np.maximum(t, 0.0))
    return spec.reference.survival(t)


def pvalues(stat: StatisticValue, kg: KgResult | float) -> PValuePair:
    """p_raw = t(t*), p_corrected = K_g * p_raw and, for Welch, p_welch = t_nu(t*)."""
    if stat.degenerate or not math.isfinite(stat.t_star):
        raise DegenerateSampleError("statistic is undefined for this sample")
    k = kg.value if isinstance(kg, KgResult) else float(kg)
    p_raw = float(raw_pvalues(stat.spec, stat.t_star))
    p_welch = None
    if stat.spec.kind == "welch":
        if stat.welch_df is None:
            raise SpecError("Welch statistic lacks its degrees of freedom")
        p_welch = float(t_tail(stat.welch_df, stat.t_star))
    return PValuePair(p_raw, k * p_raw, p_welch)


__all__ = [
    "PValuePair", "StatisticValue", "compute_statistic", "f_batch", "f_statistic", "ost_batch",
    "ost_statistic", "pvalues", "raw_pvalues", "statistic_batch", "tst_batch", "tst_statistic",
    "welch_df", "welch_df_batch", "welch_statistic",
]
