"""Numerical evaluation of the defining integrals of K_g.

One- and two-sample t (Student and Welch weights) are integrated by nested
adaptive quadrature. The F-test constant lives on R^(n1+1) and is estimated
by importance sampling with heavy-tailed proposals; for n1 = 2 a tensor-product
Gauss-Legendre rule is available as a cross-check.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..densities import JointDensity
from ..errors import DivergenceError, SpecError, TailCorrectError
from ..integrate import finite_integral, radial_integral
from .spec import KgResult, TestSpec, unit_directions

_BULK_SEED = 20240917


def bulk_radius(g: JointDensity, count: int = 4096) -> float:
    """Typical norm of a draw from g (upper decile), used as a length scale."""
    x = g.sample(np.random.default_rng(_BULK_SEED), count)
    r = np.quantile(np.linalg.norm(x, axis=1), 0.9)
    return float(r) if np.isfinite(r) and r > 0 else 1.0


def ost_prefactor(n: int) -> float:
    return 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)


def tst_prefactor(n1: int, n2: int, a: float, b: float) -> float:
    """C(n1, n2, alpha, beta) of the two-sample integral."""
    n = n1 + n2
    logc = (math.log(2.0) + 0.5 * (n - 1) * math.log(math.pi)
            + 0.5 * (n1 - 1) * math.log((n1 - 1) / a) + 0.5 * (n2 - 1) * math.log((n2 - 1) / b)
            + 0.5 * (n - 2) * math.log(1.0 / n1 + 1.0 / n2)
            - special.gammaln(0.5 * (n - 1)) - 0.5 * (n - 2) * math.log(n - 2))
    return math.exp(logc)


def f_prefactor(n1: int, n2: int) -> float:
    n = n1 + n2
    return math.exp(special.gammaln(0.5 * (n1 - 1)) + 0.5 * (n2 - 1) * math.log(math.pi * (n1 - 1))
                    - special.gammaln(0.5 * (n - 2)))


def radial_moment(g: JointDensity, w: np.ndarray, *, r0: float, epsrel: float):
    """Integral over r > 0 of r^(n-1) g(r w), by adaptive quadrature."""
    n = g.dim
    w = np.asarray(w, dtype=float)

    def f(r):
        if r == 0.0:
            return 0.0
        lp = g.logpdf(r * w)
        return math.exp((n - 1) * math.log(r) + float(lp)) if lp > -np.inf else 0.0

    return radial_integral(f, breaks=g.breakpoints_along(w), r0=r0 / max(np.linalg.norm(w), 1e-300),
                           epsrel=epsrel)


def _check_dim(g, n):
    if g.dim != n:
        raise SpecError(f"density has dimension {g.dim}, test needs {n}")


def _finalise(value, err, method, diag):
    if not np.isfinite(value):
        raise DivergenceError(f"K_g evaluated to {value}")
    if value <= 0.0:
        raise TailCorrectError("K_g evaluated to zero: the density puts no mass where T is large")
    return KgResult(value, method, err, diag)


def kg_ost_quadrature(g: JointDensity, n: int | None = None, *, epsrel: float = 1e-10) -> KgResult:
    """One-sample K_g from the radial integral along the diagonal direction."""
    n = g.dim if n is None else n
    _check_dim(g, n)
    ones = np.full(n, 1.0 / math.sqrt(n))
    val, info = radial_moment(g, ones, r0=bulk_radius(g), epsrel=epsrel)
    c = ost_prefactor(n)
    return _finalise(c * val, c * info.abserr, "quadrature",
                     {"truncation_radius": info.radius, "evaluations": info.evaluations})


def _tst_direction(omega, omega0, I1, I2):
    return math.cos(omega - omega0) * I1 + math.sin(omega - omega0) * I2


def kg_tst_quadrature(g: JointDensity, spec: TestSpec, *, epsrel: float = 1e-9) -> KgResult:
    """Two-sample (Student or Welch) K_g by nested quadrature over (omega, r)."""
    if spec.kind not in ("tst", "welch"):
        raise SpecError("kg_tst_quadrature needs a tst or welch spec")
    _check_dim(g, spec.n)
    n = spec.n
    a, b = spec.weights
    I1, I2 = unit_directions(spec)
    omega0 = math.acos(math.sqrt(spec.n2 / n))
    r0 = bulk_radius(g)
    stats = {"evaluations": 0, "radius": 0.0, "inner_err": 0.0}

    def outer(omega):
        c = math.cos(omega)
        if c <= 0.0:
            return 0.0
        val, info = radial_moment(g, _tst_direction(omega, omega0, I1, I2), r0=r0,
                                  epsrel=0.1 * epsrel)
        stats["evaluations"] += info.evaluations
        stats["radius"] = max(stats["radius"], info.radius)
        stats["inner_err"] = max(stats["inner_err"], info.abserr)
        return c ** (n - 2) * val

    # the direction loses a whole block at omega0 and omega0 - pi/2
    val, err, _ = finite_integral(outer, -0.5 * math.pi, 0.5 * math.pi,
                                  points=(omega0 - 0.5 * math.pi, omega0), epsrel=epsrel)
    c = tst_prefactor(spec.n1, spec.n2, a, b)
    err_total = c * (err + math.pi * stats["inner_err"])
    return _finalise(c * val, err_total, "quadrature",
                     {"truncation_radius": stats["radius"], "evaluations": stats["evaluations"]})


def kg_tst_gaussian(cov, spec: TestSpec, *, epsrel: float = 1e-13) -> KgResult:
    """Two-sample K_g for a zero-mean normal: a single integral over omega."""
    if spec.kind not in ("tst", "welch"):
        raise SpecError("kg_tst_gaussian needs a tst or welch spec")
    cov = np.asarray(getattr(cov, "matrix", cov), dtype=float)
    if cov.shape != (spec.n, spec.n):
        raise SpecError(f"covariance shape {cov.shape} does not match n={spec.n}")
    n = spec.n
    prec = np.linalg.inv(cov)
    _, logdet = np.linalg.slogdet(cov)
    I1, I2 = unit_directions(spec)
    omega0 = math.acos(math.sqrt(spec.n2 / n))
    q11, q12, q22 = I1 @ prec @ I1, I1 @ prec @ I2, I2 @ prec @ I2

    def f(omega):
        c, s = math.cos(omega - omega0), math.sin(omega - omega0)
        q = c * c * q11 + 2.0 * c * s * q12 + s * s * q22
        return math.cos(omega) ** (n - 2) * q ** (-0.5 * n)

    val, err, neval = finite_integral(f, -0.5 * math.pi, 0.5 * math.pi, epsrel=epsrel)
    a, b = spec.weights
    c = (tst_prefactor(spec.n1, spec.n2, a, b)
         * math.exp(special.gammaln(0.5 * n) - math.log(2.0) - 0.5 * n * math.log(math.pi)
                    - 0.5 * logdet))
    return _finalise(c * val, c * err, "quadrature", {"evaluations": neval, "route": "gaussian"})


# --------------------------------------------------------------------------
# F statistic
# --------------------------------------------------------------------------


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _mvt_sample(rng, count, dim, nu):
    z = rng.standard_normal((count, dim))
    return z / np.sqrt(rng.chisquare(nu, count) / nu)[:, None]


def _mvt_logpdf(z, nu):
    d = z.shape[-1]
    return (special.gammaln(0.5 * (nu + d)) - special.gammaln(0.5 * nu)
            - 0.5 * d * math.log(nu * math.pi)
            - 0.5 * (nu + d) * np.log1p(np.einsum("...i,...i->...", z, z) / nu))


class FProposal:
    """Heavy-tailed importance density for (x, r) in R^(n1) x R.

    x is a multivariate t with 3 d.f. located and scaled per coordinate from a
    pilot sample of g; r (the coordinate of y along the all-ones direction)
    is an independent 1-D t with 3 d.f.
    """

    nu = 3.0

    def __init__(self, g: JointDensity, n1: int, n2: int, pilot: int = 8192):
        pts = g.sample(np.random.default_rng(_BULK_SEED), pilot)
        x, y = pts[:, :n1], pts[:, n1:]
        r = y.sum(axis=1) / math.sqrt(n2)
        self.n1, self.n2 = n1, n2
        self.loc_x = np.median(x, axis=0)
        self.scale_x = _robust_scale(x)
        self.loc_r = float(np.median(r))
        self.scale_r = float(_robust_scale(r[:, None])[0])

    def draw(self, rng, count):
        zx = _mvt_sample(rng, count, self.n1, self.nu)
        zr = rng.standard_t(self.nu, count)
        x = self.loc_x + self.scale_x * zx
        r = self.loc_r + self.scale_r * zr
        logq = (_mvt_logpdf(zx, self.nu) - np.log(self.scale_x).sum()
                + _mvt_logpdf(zr[:, None], self.nu) - math.log(self.scale_r))
        return x, r, logq


def _robust_scale(a):
    q75, q25 = np.quantile(a, [0.75, 0.25], axis=0)
    s = (q75 - q25) / 1.349
    return np.where(np.isfinite(s) & (s > 0), s, 1.0)


def _sample_sd(x):
    return np.std(x, axis=-1, ddof=1)


def kg_f_integral(g: JointDensity, n1: int, n2: int, mc_samples: int = 10**6, *,
                  seed: int = 0, chunk: int = 2**17, se_ceiling: float | None = None) -> KgResult:
    """F-test K_g by importance sampling over (x, r).

    ``se_ceiling`` bounds the relative standard error; exceeding it raises.
    """
    if mc_samples < 10**4:
        raise ValueError("mc_samples must be at least 1e4")
    _check_dim(g, n1 + n2)
    prop = FProposal(g, n1, n2)
    ones = np.full(n2, 1.0 / math.sqrt(n2))
    s = s2 = 0.0
    done = 0
    index = 0
    while done < mc_samples:
        m = min(chunk, mc_samples - done)
        x, r, logq = prop.draw(_chunk_rng(seed, index), m)
        pts = np.concatenate([x, r[:, None] * ones], axis=1)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            logw = (n2 - 1) * np.log(_sample_sd(x)) + g.logpdf(pts) - logq
            w = np.exp(logw)
        w = np.where(np.isneginf(logw), 0.0, w)
        if not np.all(np.isfinite(w)):
            raise TailCorrectError("non-finite importance weights in the F-test integral")
        s += w.sum()
        s2 += (w * w).sum()
        done += m
        index += 1
    mean = s / done
    se = math.sqrt(max(s2 / done - mean * mean, 0.0) / done)
    c = f_prefactor(n1, n2)
    value, err = c * mean, c * se
    if se_ceiling is not None and err > se_ceiling * abs(value):
        raise TailCorrectError(f"Monte Carlo relative SE {err / value:.3g} above ceiling {se_ceiling}")
    return _finalise(value, err, "monte-carlo", {"samples": done, "seed": seed,
                                                  "proposal": "mvt3 x t3"})


def kg_f_gaussian(cov1, cov2, mc_samples: int = 10**6, *, seed: int = 0,
                  chunk: int = 2**17) -> KgResult:
    """F-test K_g for independent zero-mean normal samples.

    Integrates s1(x)^(n2-1) / (1 + x' cov1^-1 x)^(n/2) over R^(n1) by
    importance sampling from a multivariate Cauchy in whitened
    coordinates, which keeps the weights bounded. The dependence on cov2
    enters through the density of y's component orthogonal to the all-ones
    direction, |cov2| * (1' cov2^-1 1).
    """
    cov1 = np.asarray(getattr(cov1, "matrix", cov1), dtype=float)
    cov2 = np.asarray(getattr(cov2, "matrix", cov2), dtype=float)
    n1, n2 = cov1.shape[0], cov2.shape[0]
    n = n1 + n2
    ones = np.full(n2, 1.0 / math.sqrt(n2))
    chol = np.linalg.cholesky(cov1)
    _, ld1 = np.linalg.slogdet(cov1)
    _, ld2 = np.linalg.slogdet(cov2)
    proj = ones @ np.linalg.solve(cov2, ones)
    logC = (math.log(n - 2) + 0.5 * (n2 - 1) * math.log(n1 - 1) + special.gammaln(0.5 * (n1 - 1))
            - 0.5 * math.log(proj) - math.log(2.0) - 0.5 * (n1 + 1) * math.log(math.pi)
            - 0.5 * ld1 - 0.5 * ld2)
    s = s2 = 0.0
    done = index = 0
    while done < mc_samples:
        m = min(chunk, mc_samples - done)
        z = _mvt_sample(_chunk_rng(seed, index), m, n1, 1.0)
        x = z @ chol.T
        zz = np.einsum("ij,ij->i", z, z)
        logw = ((n2 - 1) * np.log(_sample_sd(x)) - 0.5 * n * np.log1p(zz)
                - _mvt_logpdf(z, 1.0) + 0.5 * ld1)
        w = np.exp(logw)
        s += w.sum()
        s2 += (w * w).sum()
        done += m
        index += 1
    mean = s / done
    se = math.sqrt(max(s2 / done - mean * mean, 0.0) / done)
    C = math.exp(logC)
    return _finalise(C * mean, C * se, "monte-carlo",
                     {"samples": done, "seed": seed, "route": "gaussian-independent"})


def _tan_rule(nodes, lo, hi, centre, scale):
    """Gauss-Legendre on theta in (lo, hi) for x = centre + scale * tan(theta)."""
    z, w = np.polynomial.legendre.leggauss(nodes)
    theta = 0.5 * (hi - lo) * z + 0.5 * (hi + lo)
    x = centre + scale * np.tan(theta)
    return x, 0.5 * (hi - lo) * w * scale / np.cos(theta) ** 2


def _f_tensor(g, n2, ones, centres, scales, nodes):
    h = 1.0 / math.sqrt(2.0)
    a, wa = _tan_rule(nodes, -0.5 * math.pi, 0.5 * math.pi, centres[0], scales[0])
    r, wr = _tan_rule(nodes, -0.5 * math.pi, 0.5 * math.pi, centres[2], scales[2])
    total = 0.0
    for lo, hi in ((-0.5 * math.pi, 0.0), (0.0, 0.5 * math.pi)):
        b, wb = _tan_rule(nodes, lo, hi, 0.0, scales[1])
        B, R = np.meshgrid(b, r, indexing="ij")
        WBR = np.outer(wb * np.abs(b) ** (n2 - 1), wr)
        for ai, wai in zip(a, wa):
            x = np.empty(B.shape + (2 + n2,))
            x[..., 0] = h * (ai + B)
            x[..., 1] = h * (ai - B)
            x[..., 2:] = R[..., None] * ones
            total += wai * float((WBR * g.pdf(x)).sum())
    return total


def kg_f_quadrature_n1_2(g: JointDensity, n2: int, *, nodes: int = 96) -> KgResult:
    """F-test K_g for n1 = 2 by a tensor-product Gauss-Legendre rule.

    With a = (x1 + x2)/sqrt(2) and b = (x1 - x2)/sqrt(2) the first sample
    standard deviation is |b|, so the integrand is |b|^(n2-1) g(x, r 1/sqrt(n2)).
    Every axis is mapped onto a finite interval by x = c + s tan(theta), with
    (c, s) taken from a pilot sample; b is split at its kink 0. The error
    estimate is the change from ``nodes`` to ``3 nodes / 2`` points per axis,
    so it is only trustworthy for smooth densities.
    """
    _check_dim(g, 2 + n2)
    ones = np.full(n2, 1.0 / math.sqrt(n2))
    pts = g.sample(np.random.default_rng(_BULK_SEED), 8192)
    h = 1.0 / math.sqrt(2.0)
    coords = np.column_stack([h * (pts[:, 0] + pts[:, 1]), h * (pts[:, 0] - pts[:, 1]),
                              pts[:, 2:] @ ones])
    centres = np.median(coords, axis=0)
    scales = _robust_scale(coords)
    with np.errstate(over="ignore", under="ignore"):
        coarse = _f_tensor(g, n2, ones, centres, scales, nodes)
        fine = _f_tensor(g, n2, ones, centres, scales, (3 * nodes) // 2)
    c = f_prefactor(2, n2)
    return _finalise(c * fine, c * abs(fine - coarse), "quadrature",
                     {"route": "n1=2 tensor Gauss-Legendre", "nodes": (3 * nodes) // 2})
