"""The local function G(t) behind each statistic, and finite-sample error bounds.

P(T > u) is the integral of G over a ball of radius u^(-alpha/2) in R^k, so
the constant, the absolute error bound and the second-order relative error
all come from G(0), its gradient near 0 and its Laplacian at 0.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from ..densities import JointDensity
from ..errors import FiniteDifferenceError, SpecError
from ..integrate import finite_integral
from ..tails import ShrinkBallContext, shrink_ball_K, shrink_ball_second_order
from .closed_form import gaussian_covariance
from .numeric import FProposal, _chunk_rng, _sample_sd, bulk_radius, radial_moment
from .spec import ErrorBound, TestSpec, build_orthogonal_frame, unit_directions

_DIRECTION_SEED = 612
_N_DIRECTIONS = 32


class _GaussianRadial:
    """Closed-form radial moment of a zero-mean normal along any vector w."""

    def __init__(self, cov):
        self.n = cov.shape[0]
        self.prec = np.linalg.inv(cov)
        _, logdet = np.linalg.slogdet(cov)
        self.logc = special.gammaln(0.5 * self.n) - math.log(2.0) - 0.5 * self.n * math.log(math.pi) \
            - 0.5 * logdet

    def __call__(self, w):
        return math.exp(self.logc) * float(w @ self.prec @ w) ** (-0.5 * self.n), 0.0


class _QuadRadial:
    def __init__(self, g, epsrel):
        self.g, self.epsrel = g, epsrel
        self.r0 = bulk_radius(g)

    def __call__(self, w):
        val, info = radial_moment(self.g, w, r0=self.r0, epsrel=self.epsrel)
        return val, info.abserr


def _radial(g, epsrel):
    cov = gaussian_covariance(g)
    return _GaussianRadial(cov) if cov is not None else _QuadRadial(g, epsrel)


class GFunction:
    """G(t) on R^k for a (test, density) pair.

    Calling the object returns ``(value, noise)``, where ``noise`` is the
    absolute accuracy of the evaluation.
    """

    def __init__(self, spec: TestSpec, g: JointDensity, *, epsrel: float = 1e-12,
                 mc_samples: int = 200_000, seed: int = 0):
        if g.dim != spec.dim:
            raise SpecError(f"density has dimension {g.dim}, test needs {spec.dim}")
        self.spec, self.g = spec, g
        self.k = spec.ball_dim
        if spec.kind == "ost":
            self._impl = _OstG(spec, g, epsrel)
        elif spec.kind in ("tst", "welch"):
            self._impl = _TstG(spec, g, epsrel)
        else:
            self._impl = _FG(spec, g, mc_samples, seed)

    def __call__(self, t) -> tuple[float, float]:
        t = np.asarray(t, dtype=float).reshape(-1)
        if t.size != self.k:
            raise SpecError(f"G takes a vector of length {self.k}, got {t.size}")
        return self._impl(t)


class _OstG:
    def __init__(self, spec, g, epsrel):
        n = spec.n
        self.k = n - 1
        self.A = build_orthogonal_frame(spec).matrix
        self.ones = np.full(n, 1.0 / math.sqrt(n))
        self.radial = _radial(g, epsrel)
        self.scale = self.k ** (0.5 * self.k)

    def __call__(self, t):
        v = np.append(math.sqrt(self.k) * t, 0.0)
        val, err = self.radial(self.ones + self.A @ v)
        return self.scale * val, self.scale * err


class _TstG:
    def __init__(self, spec, g, epsrel):
        n1, n2, n = spec.n1, spec.n2, spec.n
        a, b = spec.weights
        self.n1, self.n = n1, n
        self.A = build_orthogonal_frame(spec).matrix
        self.I1, self.I2 = unit_directions(spec)
        self.omega0 = math.acos(math.sqrt(n2 / n))
        s = 1.0 / n1 + 1.0 / n2
        self.c1 = math.sqrt(s * (n1 - 1) / a)
        self.c2 = math.sqrt(s * (n2 - 1) / b)
        self.M = ((n1 - 1) / a) ** (0.5 * (n1 - 1)) * ((n2 - 1) / b) ** (0.5 * (n2 - 1)) \
            * s ** (0.5 * (n - 2))
        self.radial = _radial(g, 0.1 * epsrel)
        self.epsrel = epsrel

    def __call__(self, t):
        n1, n = self.n1, self.n
        v = np.zeros(n)
        err_inner = [0.0]

        def f(omega):
            c = math.cos(omega)
            if c <= 0.0:
                return 0.0
            v[: n1 - 1] = self.c1 * c * t[: n1 - 1]
            v[n1: n - 1] = self.c2 * c * t[n1 - 1:]
            w = (math.cos(omega - self.omega0) * self.I1 + math.sin(omega - self.omega0) * self.I2
                 + self.A @ v)
            val, err = self.radial(w)
            err_inner[0] = max(err_inner[0], err)
            return c ** (n - 2) * val

        val, err, _ = finite_integral(f, -0.5 * math.pi, 0.5 * math.pi,
                                      points=(self.omega0 - 0.5 * math.pi, self.omega0),
                                      epsrel=self.epsrel)
        return self.M * val, self.M * (err + math.pi * err_inner[0])


class _FG:
    """Importance-sampling estimate of G with common random numbers.

    The same draws are reused for every t, so G is estimated by a smooth
    function of t and finite differences see no sampling noise; the
    statistical error shifts G and its derivatives together.
    """

    def __init__(self, spec, g, mc_samples, seed):
        n1, n2 = spec.n1, spec.n2
        self.g, self.n1, self.n2 = g, n1, n2
        self.k = n2 - 1
        prop = FProposal(g, n1, n2)
        x, r, logq = prop.draw(_chunk_rng(seed, 0), mc_samples)
        self.s1 = _sample_sd(x)
        ones = np.full(n2, 1.0 / math.sqrt(n2))
        self.base = np.concatenate([x, r[:, None] * ones], axis=1)
        with np.errstate(divide="ignore"):
            self.logfac = self.k * np.log(self.s1) - logq
        H = build_orthogonal_frame(TestSpec.ost(n2)).matrix
        self.H = H
        self.scale = self.k ** (0.5 * self.k)

    def __call__(self, t):
        shift = self.H @ np.append(math.sqrt(self.k) * t, 0.0)
        pts = self.base.copy()
        pts[:, self.n1:] += self.s1[:, None] * shift
        with np.errstate(divide="ignore", over="ignore"):
            w = np.exp(self.logfac + self.g.logpdf(pts))
        val = self.scale * float(w.mean())
        return val, 1e-13 * abs(val)


def eval_G(spec: TestSpec, g: JointDensity, t, **kw) -> float:
    """G(t) for the given test and density (see :class:`GFunction`)."""
    return GFunction(spec, g, **kw)(t)[0]


def _gradient(G, x, h):
    k = x.size
    grad = np.empty(k)
    noise = 0.0
    for i in range(k):
        e = np.zeros(k)
        e[i] = h
        fp, ep = G(x + e)
        fm, em = G(x - e)
        grad[i] = (fp - fm) / (2.0 * h)
        noise = max(noise, ep, em)
    return grad, noise


def error_bounds(spec: TestSpec, g: JointDensity, u: float, *, kg: float | None = None,
                 n_directions: int = _N_DIRECTIONS, **kw) -> ErrorBound:
    """Absolute bound d(u) on |P(T > u) - K_g t(u)| and the relative-error constant C3.

    The supremum of |grad G| over the ball of radius u^(-alpha/2) is taken
    over the centre, the 2k axis points on the sphere and ``n_directions``
    random points on the sphere, with central differences of step
    max(1e-4, radius/8). The Laplacian at 0 uses the same step.
    """
    if not u > 0:
        raise ValueError("u must be positive")
    alpha, m, k = spec.triple
    G = GFunction(spec, g, **kw)
    rho = u ** (-0.5 * alpha)
    h = max(1e-4, rho / 8.0)

    origin = np.zeros(k)
    G0, noise0 = G(origin)
    if not G0 > 0:
        raise SpecError("G(0) is not positive: K_g vanishes for this density")

    rng = np.random.default_rng(_DIRECTION_SEED)
    dirs = rng.standard_normal((n_directions, k))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = [origin] + [s * rho * e for e in np.eye(k) for s in (1.0, -1.0)] + list(rho * dirs)

    sup, noise = 0.0, noise0
    for p in pts:
        grad, nz = _gradient(G, p, h)
        sup = max(sup, float(np.linalg.norm(grad)))
        noise = max(noise, nz)

    lap = -2.0 * k * G0
    for i in range(k):
        e = np.zeros(k)
        e[i] = h
        fp, ep = G(e)
        fm, em = G(-e)
        lap += fp + fm
        noise = max(noise, ep, em)
    lap /= h * h
    if noise / (h * h) > 1e-3 * abs(G0):
        raise FiniteDifferenceError(
            f"G is evaluated to +-{noise:.3g}, too coarse for step {h:.3g} (G(0)={G0:.6g})")

    ctx = ShrinkBallContext(k=k, m=m, alpha=alpha, G0=G0, grad_sup_norm=sup, hess_trace=lap)
    K = shrink_ball_K(ctx) if kg is None else float(getattr(kg, "value", kg))
    d = u ** (-0.5 * alpha * (k + 1)) * (ctx.C1 * sup + ctx.C2 * (K / alpha) * rho)
    L = shrink_ball_second_order(ctx)
    pref = alpha * k * special.beta(0.5 * m, 0.5 * k) / (2.0 * (k / m) ** (0.5 * k))
    C3 = pref * L / K
    return ErrorBound(d_value=float(d), C3=float(C3), triple=(alpha, m, k), u=float(u), kg=float(K),
                      G0=float(G0), grad_sup_norm=sup, hess_trace=float(lap), L=float(L))


__all__ = ["GFunction", "eval_G", "error_bounds"]
