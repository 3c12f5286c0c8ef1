"""Hard-coded closed forms for K_g.

Covers the i.i.d. one-sample table, the unequal-variance Gaussian tables
for the Student and Welch two-sample tests, the dependent Gaussian
one-sample formula, and the F-test power formula for spherical Gaussian
samples.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..densities import IID, MVN, JointDensity, MarginalFamily, Product
from .spec import TestSpec

_sqrt = math.sqrt
_lg = special.gammaln


def _table1(family: str, n: int, p: dict) -> float:
    g = lambda x: math.exp(_lg(x))  # noqa: E731
    pn = math.pi * n
    if family == "normal":
        mu, sigma = p["mu"], p["sigma"]
        z = -n * mu * mu / (2.0 * sigma * sigma)
        return (special.hyp1f1(0.5 * (1 - n), 0.5, z)
                + (mu / sigma) * _sqrt(2.0 * n) * math.exp(_lg(0.5 * (1 + n)) - _lg(0.5 * n))
                * special.hyp1f1(1.0 - 0.5 * n, 1.5, z))
    if family == "half-normal":
        return 2.0 ** n
    if family == "log-normal":
        s = p["sigma"]
        return (n ** (0.5 * (n - 1)) * _sqrt(math.pi)
                / (2.0 ** (0.5 * (n - 3)) * s ** (n - 1) * g(0.5 * n)))
    if family == "chi":
        nu = p["nu"]
        return math.exp(n * math.log(2.0) + 0.5 * n * math.log(math.pi) + _lg(0.5 * n * nu)
                        - 0.5 * n * (nu - 1) * math.log(n) - n * _lg(0.5 * nu) - _lg(0.5 * n))
    if family in ("chi-squared", "inverse-chi-squared"):
        nu = p["nu"]
        return math.exp(math.log(2.0) + 0.5 * n * math.log(math.pi) + _lg(0.5 * n * nu)
                        - 0.5 * n * (nu - 1) * math.log(n) - n * _lg(0.5 * nu) - _lg(0.5 * n))
    if family == "f":
        mu, nu = p["mu"], p["nu"]
        return math.exp(math.log(2.0) + 0.5 * n * math.log(pn) + _lg(0.5 * mu * n)
                        + _lg(0.5 * nu * n) + n * _lg(0.5 * (mu + nu)) - _lg(0.5 * n)
                        - n * (_lg(0.5 * mu) + _lg(0.5 * nu)) - _lg(0.5 * (mu + nu) * n))
    if family == "student-t":
        nu = p["nu"]
        return math.exp(0.5 * n * math.log(n) + _lg(0.5 * nu * n) - _lg(0.5 * (nu + 1) * n)
                        + n * (_lg(0.5 * (nu + 1)) - _lg(0.5 * nu)))
    if family == "cauchy":
        return n ** (0.5 * n) / (2.0 ** (n - 1) * math.pi ** (0.5 * (n - 1)) * g(0.5 * (n + 1)))
    if family == "beta":
        a, b = p["alpha"], p["beta"]
        return math.exp(math.log(2.0) + 0.5 * n * math.log(pn) + _lg(a * n) + _lg(1 + (b - 1) * n)
                        - n * special.betaln(a, b) - _lg(0.5 * n) - _lg(1 + (a + b - 1) * n))
    if family in ("gamma", "inverse-gamma"):
        a = p["alpha"]
        return math.exp(math.log(2.0) + 0.5 * n * (1 - 2 * a) * math.log(n)
                        + 0.5 * n * math.log(math.pi) + _lg(a * n) - n * _lg(a) - _lg(0.5 * n))
    if family == "uniform":
        a, b = p["a"], p["b"]
        pref = pn ** (0.5 * n) / g(0.5 * n + 1.0)
        if a <= 0.0:
            return pref * (b / (b - a)) ** n
        return pref * (b ** n - a ** n) / (b - a) ** n
    if family == "exponential":
        return 2.0 * (math.pi / n) ** (0.5 * n) * g(n) / g(0.5 * n)
    if family == "centered-exponential":
        return 2.0 * (math.pi / n) ** (0.5 * n) * g(n) / (math.e ** n * g(0.5 * n))
    if family == "maxwell":
        return (4.0 / n) ** n * g(1.5 * n) / g(0.5 * n)
    if family == "pareto":
        return pn ** (0.5 * n) * p["alpha"] ** (n - 1) / g(0.5 * n + 1.0)
    raise KeyError(family)


def table1_kg(marginal: MarginalFamily, n: int) -> float:
    """K_g of the one-sample t statistic for n i.i.d. draws of ``marginal``."""
    return float(_table1(marginal.family, int(n), dict(marginal.params)))


TABLE1_FAMILIES = frozenset([
    "normal", "half-normal", "log-normal", "chi", "chi-squared", "inverse-chi-squared", "f",
    "student-t", "cauchy", "beta", "gamma", "inverse-gamma", "uniform", "exponential",
    "centered-exponential", "maxwell", "pareto",
])

s5, s7, s3, s11 = _sqrt(5), _sqrt(7), _sqrt(3), _sqrt(11)

# keyed by (n1, n2); k = sigma1 / sigma2
TABLE2 = {
    (2, 2): lambda k: (k**2 + 1) / (2 * k),
    (3, 2): lambda k: (2 * k**2 + 3) ** 1.5 / (5 * s5 * k**2),
    (4, 2): lambda k: (k**2 + 2) ** 2 / (9 * k**3),
    (5, 2): lambda k: (2 * k**2 + 5) ** 2.5 / (49 * s7 * k**4),
    (6, 2): lambda k: (k**2 + 3) ** 3 / (64 * k**5),
    (2, 3): lambda k: (3 * k**2 + 2) ** 1.5 / (5 * s5 * k),
    (3, 3): lambda k: (k**2 + 1) ** 2 / (4 * k**2),
    (4, 3): lambda k: (3 * k**2 + 4) ** 2.5 / (49 * s7 * k**3),
    (5, 3): lambda k: (3 * k**2 + 5) ** 3 / (512 * k**4),
    (6, 3): lambda k: (k**2 + 2) ** 3.5 / (27 * s3 * k**5),
    (2, 4): lambda k: (2 * k**2 + 1) ** 2 / (9 * k),
    (3, 4): lambda k: (4 * k**2 + 3) ** 2.5 / (49 * s7 * k**2),
    (4, 4): lambda k: (k**2 + 1) ** 3 / (8 * k**3),
    (5, 4): lambda k: (4 * k**2 + 5) ** 3.5 / (2187 * k**4),
    (6, 4): lambda k: (2 * k**2 + 3) ** 4 / (625 * k**5),
    (2, 5): lambda k: (5 * k**2 + 2) ** 2.5 / (49 * s7 * k),
    (3, 5): lambda k: (5 * k**2 + 3) ** 3 / (512 * k**2),
    (4, 5): lambda k: (5 * k**2 + 4) ** 3.5 / (2187 * k**3),
    (5, 5): lambda k: (k**2 + 1) ** 4 / (16 * k**4),
    (6, 5): lambda k: (5 * k**2 + 6) ** 4.5 / (14641 * s11 * k**5),
    (2, 6): lambda k: (3 * k**2 + 1) ** 3 / (64 * k),
    (3, 6): lambda k: (2 * k**2 + 1) ** 3.5 / (27 * s3 * k**2),
    (4, 6): lambda k: (3 * k**2 + 2) ** 4 / (625 * k**3),
    (5, 6): lambda k: (6 * k**2 + 5) ** 4.5 / (14641 * s11 * k**4),
    (6, 6): lambda k: (k**2 + 1) ** 5 / (32 * k**5),
}

TABLE3 = {
    (2, 2): lambda k: (k**2 + 1) / (2 * k),
    (3, 2): lambda k: (2 * k**2 + 3) ** 1.5 / (9 * k**2),
    (4, 2): lambda k: 3 * _sqrt(1.5) * (k**2 + 2) ** 2 / (16 * k**3),
    (5, 2): lambda k: 4 * (2 * k**2 + 5) ** 2.5 / (125 * k**4),
    (2, 3): lambda k: (3 * k**2 + 2) ** 1.5 / (9 * k),
    (3, 3): lambda k: (k**2 + 1) ** 2 / (4 * k**2),
    (4, 3): lambda k: (3 * k**2 + 4) ** 2.5 / (50 * s5 * k**3),
    (5, 3): lambda k: 4 * (3 * k**2 + 5) ** 3 / (1215 * k**4),
    (2, 4): lambda k: 3 * _sqrt(1.5) * (2 * k**2 + 1) ** 2 / (16 * k),
    (3, 4): lambda k: (4 * k**2 + 3) ** 2.5 / (50 * s5 * k**2),
    (4, 4): lambda k: (k**2 + 1) ** 3 / (8 * k**3),
    (5, 4): lambda k: 3 * _sqrt(3 / 35) * (4 * k**2 + 5) ** 3.5 / (1715 * k**4),
    (2, 5): lambda k: 4 * (5 * k**2 + 2) ** 2.5 / (125 * k),
    (3, 5): lambda k: 4 * (5 * k**2 + 3) ** 3 / (1215 * k**2),
    (4, 5): lambda k: 3 * _sqrt(3 / 35) * (5 * k**2 + 4) ** 3.5 / (1715 * k**3),
    (5, 5): lambda k: (k**2 + 1) ** 4 / (16 * k**4),
    (2, 6): lambda k: 25 * _sqrt(5 / 3) * (3 * k**2 + 1) ** 3 / (216 * k),
    (3, 6): lambda k: 25 * _sqrt(5 / 7) * (2 * k**2 + 1) ** 3.5 / (343 * k**2),
    (4, 6): lambda k: 25 * _sqrt(2.5) * (3 * k**2 + 2) ** 4 / (16384 * k**3),
    (5, 6): lambda k: 4 * (6 * k**2 + 5) ** 4.5 / (177147 * k**4),
}


def table2_kg(n1: int, n2: int, k: float) -> float:
    """Student two-sample K_g for block variances (sigma1^2, sigma2^2), k = sigma1/sigma2."""
    return float(TABLE2[(n1, n2)](k))


def table3_kg(n1: int, n2: int, k: float) -> float:
    """Welch K_g for block variances (sigma1^2, sigma2^2), k = sigma1/sigma2."""
    return float(TABLE3[(n1, n2)](k))


def kg_ost_gaussian_closed(cov: np.ndarray) -> float:
    """One-sample K_g for a zero-mean normal with covariance ``cov``.

    K_g = |cov|^(-1/2) (e' cov^-1 e)^(-n/2) with e the unit diagonal direction.
    When e is an eigenvector of ``cov`` this equals (e' cov e)^(n/2) / |cov|^(1/2).
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0]
    ones = np.full(n, 1.0 / math.sqrt(n))
    sign, logdet = np.linalg.slogdet(cov)
    q = ones @ np.linalg.solve(cov, ones)
    return float(math.exp(-0.5 * n * math.log(q) - 0.5 * logdet))


def kg_f_spherical(n2: int, sigma1: float, sigma2: float) -> float:
    """F-test K_g for independent spherical normal samples: (sigma1/sigma2)^(n2-1)."""
    return float((sigma1 / sigma2) ** (n2 - 1))


# --------------------------------------------------------------------------
# recognising Gaussian structure
# --------------------------------------------------------------------------


def gaussian_covariance(g: JointDensity) -> np.ndarray | None:
    """Covariance matrix if ``g`` is a zero-mean normal in disguise, else None."""
    if isinstance(g, MVN):
        return np.array(g.cov.matrix)
    if isinstance(g, IID):
        if g.marginal.family == "normal" and g.marginal.params["mu"] == 0.0:
            return g.marginal.params["sigma"] ** 2 * np.eye(g.dim)
        return None
    if isinstance(g, Product):
        parts = [gaussian_covariance(b) for b in g.blocks]
        if any(p is None for p in parts):
            return None
        out = np.zeros((g.dim, g.dim))
        i = 0
        for p in parts:
            d = p.shape[0]
            out[i:i + d, i:i + d] = p
            i += d
        return out
    return None


def block_scalar_sigmas(cov: np.ndarray, n1: int) -> tuple[float, float] | None:
    """(sigma1, sigma2) if cov = diag(s1^2 I_n1, s2^2 I_n2), else None."""
    d = np.diag(cov)
    if np.count_nonzero(cov - np.diag(d)) != 0:
        return None
    a, b = d[:n1], d[n1:]
    if np.ptp(a) > 1e-14 * a.max() or np.ptp(b) > 1e-14 * b.max():
        return None
    return math.sqrt(a[0]), math.sqrt(b[0])


def is_block_independent(cov: np.ndarray, n1: int) -> bool:
    return not np.any(cov[:n1, n1:]) and not np.any(cov[n1:, :n1])


def closed_form_kg(g: JointDensity, spec: TestSpec) -> tuple[float, str] | None:
    """Closed-form K_g when the (density, test) pair is recognised.

    Returns ``(value, source)`` or None.
    """
    if g.dim != spec.dim:
        return None
    if spec.kind == "ost":
        if isinstance(g, IID) and g.marginal.family in TABLE1_FAMILIES:
            return table1_kg(g.marginal, spec.n), f"iid-table:{g.marginal.family}"
        cov = gaussian_covariance(g)
        if cov is not None:
            return kg_ost_gaussian_closed(cov), "gaussian-ost"
        return None
    cov = gaussian_covariance(g)
    if cov is None:
        return None
    sig = block_scalar_sigmas(cov, spec.n1)
    if sig is None:
        return None
    k = sig[0] / sig[1]
    if spec.kind == "tst" and (spec.n1, spec.n2) in TABLE2:
        return table2_kg(spec.n1, spec.n2, k), "student-table"
    if spec.kind == "tst" and k == 1.0:
        return 1.0, "gaussian-null"
    if spec.kind == "welch" and (spec.n1, spec.n2) in TABLE3:
        return table3_kg(spec.n1, spec.n2, k), "welch-table"
    if spec.kind == "f":
        return kg_f_spherical(spec.n2, *sig), "f-spherical"
    return None
