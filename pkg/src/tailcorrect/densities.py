"""Joint densities of the data vector.

Four variants are supported: i.i.d. draws from a univariate family,
zero-mean multivariate normals, products of independent blocks, and
user-supplied pdf/sampler pairs. Every variant evaluates its log-density
vectorised over leading axes (``x[..., dim]``) and samples through a
caller-owned ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy import special

from .errors import SpecError

_LOG_2PI = math.log(2.0 * math.pi)


# --------------------------------------------------------------------------
# univariate families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _FamilyDef:
    defaults: Mapping[str, float]
    check: Callable[[Mapping[str, float]], str | None]
    logpdf: Callable[..., np.ndarray]
    support: Callable[[Mapping[str, float]], tuple[float, float]]
    sample: Callable[..., np.ndarray]


def _positive(*names):
    def check(p):
        for k in names:
            if not p[k] > 0:
                return f"{k} must be > 0"
        return None

    return check


def _chain(*checks):
    def check(p):
        for c in checks:
            msg = c(p)
            if msg:
                return msg
        return None

    return check


def _at_least(name, lo, strict=False):
    def check(p):
        ok = p[name] > lo if strict else p[name] >= lo
        if not ok:
            return f"{name} must be {'>' if strict else '>='} {lo}"
        return None

    return check


def _uniform_check(p):
    if not p["b"] > p["a"]:
        return "uniform needs b > a"
    if not p["b"] > 0:
        return "uniform needs b > 0"
    return None


def _restrict(x, lo, hi, logp):
    # -inf outside the closed support
    return np.where((x >= lo) & (x <= hi), logp, -np.inf)


def _lp_normal(x, mu, sigma):
    z = (x - mu) / sigma
    return -0.5 * z * z - math.log(sigma) - 0.5 * _LOG_2PI


def _lp_halfnormal(x, sigma):
    with np.errstate(invalid="ignore"):
        return _restrict(x, 0.0, np.inf, math.log(2.0) + _lp_normal(x, 0.0, sigma))


def _lp_lognormal(x, mu, sigma):
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(np.where(x > 0, x, 1.0))
        lp = -lx - math.log(sigma) - 0.5 * _LOG_2PI - 0.5 * ((lx - mu) / sigma) ** 2
    return np.where(x > 0, lp, -np.inf)


def _lp_chi(x, nu):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.maximum(x, 0.0)
        lp = (special.xlogy(nu - 1.0, xs) - 0.5 * xs * xs
              - (0.5 * nu - 1.0) * math.log(2.0) - special.gammaln(0.5 * nu))
    return _restrict(x, 0.0, np.inf, lp)


def _lp_chi2(x, nu):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.maximum(x, 0.0)
        lp = (special.xlogy(0.5 * nu - 1.0, xs) - 0.5 * xs
              - 0.5 * nu * math.log(2.0) - special.gammaln(0.5 * nu))
    return _restrict(x, 0.0, np.inf, lp)


def _lp_invchi2(x, nu):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.where(x > 0, x, 1.0)
        lp = (-(0.5 * nu + 1.0) * np.log(xs) - 0.5 / xs
              - 0.5 * nu * math.log(2.0) - special.gammaln(0.5 * nu))
    return np.where(x > 0, lp, -np.inf)


def _lp_f(x, mu, nu):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.maximum(x, 0.0)
        lp = (0.5 * mu * math.log(mu / nu) + special.xlogy(0.5 * mu - 1.0, xs)
              - 0.5 * (mu + nu) * np.log1p(mu * xs / nu)
              - special.betaln(0.5 * mu, 0.5 * nu))
    return _restrict(x, 0.0, np.inf, lp)


def _lp_t(x, nu):
    return (special.gammaln(0.5 * (nu + 1.0)) - special.gammaln(0.5 * nu)
            - 0.5 * math.log(nu * math.pi) - 0.5 * (nu + 1.0) * np.log1p(x * x / nu))


def _lp_cauchy(x):
    return -math.log(math.pi) - np.log1p(x * x)


def _lp_beta(x, alpha, beta):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.clip(x, 0.0, 1.0)
        lp = (special.xlogy(alpha - 1.0, xs) + special.xlog1py(beta - 1.0, -xs)
              - special.betaln(alpha, beta))
    return _restrict(x, 0.0, 1.0, lp)


def _lp_gamma(x, alpha, theta):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.maximum(x, 0.0)
        lp = (special.xlogy(alpha - 1.0, xs) - xs / theta
              - special.gammaln(alpha) - alpha * math.log(theta))
    return _restrict(x, 0.0, np.inf, lp)


def _lp_invgamma(x, alpha, theta):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.where(x > 0, x, 1.0)
        lp = (alpha * math.log(theta) - special.gammaln(alpha)
              - (alpha + 1.0) * np.log(xs) - theta / xs)
    return np.where(x > 0, lp, -np.inf)


def _lp_uniform(x, a, b):
    return _restrict(x, a, b, np.full(np.shape(x), -math.log(b - a)))


def _lp_exponential(x, lam):
    return _restrict(x, 0.0, np.inf, math.log(lam) - lam * x)


def _lp_centered_exponential(x, lam):
    return _restrict(x, -1.0 / lam, np.inf, math.log(lam) - lam * x - 1.0)


def _lp_maxwell(x, sigma):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.maximum(x, 0.0)
        lp = (0.5 * math.log(2.0 / math.pi) + special.xlogy(2.0, xs)
              - 0.5 * (xs / sigma) ** 2 - 3.0 * math.log(sigma))
    return _restrict(x, 0.0, np.inf, lp)


def _lp_pareto(x, k, alpha):
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.where(x > 0, x, 1.0)
        lp = math.log(alpha) + alpha * math.log(k) - (alpha + 1.0) * np.log(xs)
    return _restrict(x, k, np.inf, lp)


_HALF_LINE = lambda p: (0.0, math.inf)  # noqa: E731
_REAL_LINE = lambda p: (-math.inf, math.inf)  # noqa: E731

FAMILIES: dict[str, _FamilyDef] = {
    "normal": _FamilyDef(
        {"mu": 0.0, "sigma": 1.0}, _positive("sigma"), _lp_normal, _REAL_LINE,
        lambda rng, size, mu, sigma: rng.normal(mu, sigma, size)),
    "half-normal": _FamilyDef(
        {"sigma": 1.0}, _positive("sigma"), _lp_halfnormal, _HALF_LINE,
        lambda rng, size, sigma: np.abs(rng.normal(0.0, sigma, size))),
    "log-normal": _FamilyDef(
        {"mu": 0.0, "sigma": 1.0}, _positive("sigma"), _lp_lognormal, _HALF_LINE,
        lambda rng, size, mu, sigma: rng.lognormal(mu, sigma, size)),
    "chi": _FamilyDef(
        {"nu": 3.0}, _at_least("nu", 1.0), _lp_chi, _HALF_LINE,
        lambda rng, size, nu: np.sqrt(rng.chisquare(nu, size))),
    "chi-squared": _FamilyDef(
        {"nu": 4.0}, _at_least("nu", 2.0), _lp_chi2, _HALF_LINE,
        lambda rng, size, nu: rng.chisquare(nu, size)),
    "inverse-chi-squared": _FamilyDef(
        {"nu": 4.0}, _at_least("nu", 2.0), _lp_invchi2, _HALF_LINE,
        lambda rng, size, nu: 1.0 / rng.chisquare(nu, size)),
    "f": _FamilyDef(
        {"mu": 4.0, "nu": 6.0}, _chain(_at_least("mu", 2.0), _positive("nu")), _lp_f,
        _HALF_LINE, lambda rng, size, mu, nu: rng.f(mu, nu, size)),
    "student-t": _FamilyDef(
        {"nu": 5.0}, _positive("nu"), _lp_t, _REAL_LINE,
        lambda rng, size, nu: rng.standard_t(nu, size)),
    "cauchy": _FamilyDef(
        {}, lambda p: None, _lp_cauchy, _REAL_LINE,
        lambda rng, size: rng.standard_cauchy(size)),
    "beta": _FamilyDef(
        {"alpha": 2.0, "beta": 3.0},
        _chain(_at_least("alpha", 1.0, strict=True), _at_least("beta", 1.0, strict=True)),
        _lp_beta, lambda p: (0.0, 1.0),
        lambda rng, size, alpha, beta: rng.beta(alpha, beta, size)),
    "gamma": _FamilyDef(
        {"alpha": 2.0, "theta": 1.0},
        _chain(_at_least("alpha", 1.0, strict=True), _positive("theta")),
        _lp_gamma, _HALF_LINE,
        lambda rng, size, alpha, theta: rng.gamma(alpha, theta, size)),
    "inverse-gamma": _FamilyDef(
        {"alpha": 3.0, "theta": 1.0},
        _chain(_at_least("alpha", 1.0, strict=True), _positive("theta")),
        _lp_invgamma, _HALF_LINE,
        lambda rng, size, alpha, theta: theta / rng.gamma(alpha, 1.0, size)),
    "uniform": _FamilyDef(
        {"a": -1.0, "b": 1.0}, _uniform_check, _lp_uniform, lambda p: (p["a"], p["b"]),
        lambda rng, size, a, b: rng.uniform(a, b, size)),
    "exponential": _FamilyDef(
        {"lam": 1.0}, _positive("lam"), _lp_exponential, _HALF_LINE,
        lambda rng, size, lam: rng.exponential(1.0 / lam, size)),
    "centered-exponential": _FamilyDef(
        {"lam": 1.0}, _positive("lam"), _lp_centered_exponential,
        lambda p: (-1.0 / p["lam"], math.inf),
        lambda rng, size, lam: rng.exponential(1.0 / lam, size) - 1.0 / lam),
    "maxwell": _FamilyDef(
        {"sigma": 1.0}, _positive("sigma"), _lp_maxwell, _HALF_LINE,
        lambda rng, size, sigma: sigma * np.sqrt(rng.chisquare(3.0, size))),
    # k is the lower end of the support, alpha the tail exponent
    "pareto": _FamilyDef(
        {"k": 1.0, "alpha": 2.0}, _positive("k", "alpha"), _lp_pareto,
        lambda p: (p["k"], math.inf),
        lambda rng, size, k, alpha: k * (1.0 + rng.pareto(alpha, size))),
}

_ALIASES = {"t": "student-t", "halfnormal": "half-normal", "lognormal": "log-normal",
            "chi2": "chi-squared", "inv-chi-squared": "inverse-chi-squared",
            "invgamma": "inverse-gamma", "F": "f"}


@dataclass(frozen=True)
class MarginalFamily:
    """A univariate density from the catalogue, with validated parameters.

    >>> MarginalFamily("cauchy").pdf(0.0) == 1 / math.pi
    True
    """

    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        name = _ALIASES.get(self.family, self.family)
        if name not in FAMILIES:
            raise SpecError(f"unknown family {self.family!r}; known: {sorted(FAMILIES)}")
        spec = FAMILIES[name]
        unknown = set(self.params) - set(spec.defaults)
        if unknown:
            raise SpecError(f"unknown parameter(s) {sorted(unknown)} for {name}")
        params = {k: float(self.params.get(k, v)) for k, v in spec.defaults.items()}
        if any(not math.isfinite(v) for v in params.values()):
            raise SpecError(f"non-finite parameter for {name}: {params}")
        msg = spec.check(params)
        if msg:
            raise SpecError(f"{name}: {msg} (got {params})")
        object.__setattr__(self, "family", name)
        object.__setattr__(self, "params", params)

    @property
    def _def(self) -> _FamilyDef:
        return FAMILIES[self.family]

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.isnan(x).any():
            raise ValueError("NaN passed to a density")
        return self._def.logpdf(x, **self.params)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def support(self) -> tuple[float, float]:
        return self._def.support(self.params)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.asarray(self._def.sample(rng, size, **self.params), dtype=float)

    def to_json(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}


def pdf_marginal(family: MarginalFamily, x) -> np.ndarray | float:
    """Density of a catalogue family; zero outside its support."""
    out = family.pdf(x)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# joint densities
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceSpec:
    """A symmetric, strictly positive-definite covariance matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise SpecError(f"covariance must be a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise SpecError("covariance has non-finite entries")
        scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise SpecError("covariance is not symmetric")
        m = 0.5 * (m + m.T)
        lam_min = np.linalg.eigvalsh(m)[0]
        if not lam_min > 0:
            raise SpecError(f"covariance is not positive definite (min eigenvalue {lam_min:g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def diagonal(cls, variances: Sequence[float]) -> "CovarianceSpec":
        return cls(np.diag(np.asarray(variances, dtype=float)))


class JointDensity:
    """Interface shared by all joint-density variants."""

    dim: int

    def logpdf(self, x) -> np.ndarray:
        raise NotImplementedError

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.logpdf(x))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError

    def breakpoints_along(self, direction) -> np.ndarray:
        """Radii r > 0 at which ``r * direction`` crosses a support boundary."""
        return np.empty(0)

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise SpecError(f"expected trailing dimension {self.dim}, got shape {x.shape}")
        if np.isnan(x).any():
            raise ValueError("NaN passed to a density")
        return x


@dataclass(frozen=True, eq=False)
class IID(JointDensity):
    marginal: MarginalFamily
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise SpecError(f"iid dimension must be a positive integer, got {self.n}")

    @property
    def dim(self) -> int:
        return int(self.n)

    def logpdf(self, x):
        x = self._check(x)
        return self.marginal.logpdf(x).sum(axis=-1)

    def sample(self, rng, count):
        return self.marginal.sample(rng, (count, self.dim))

    def breakpoints_along(self, direction):
        lo, hi = self.marginal.support()
        d = np.asarray(direction, dtype=float)
        out = []
        for edge in (lo, hi):
            if math.isfinite(edge):
                nz = d[d != 0]
                r = edge / nz
                out.append(r[r > 0])
        return np.unique(np.concatenate(out)) if out else np.empty(0)

    def to_json(self):
        return {"kind": "iid", **self.marginal.to_json(), "n": self.dim}


@dataclass(frozen=True, eq=False)
class MVN(JointDensity):
    """Zero-mean multivariate normal."""

    cov: CovarianceSpec

    def __post_init__(self):
        m = self.cov.matrix
        chol = np.linalg.cholesky(m)
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_prec", np.linalg.inv(m))
        object.__setattr__(self, "_logdet", 2.0 * np.log(np.diag(chol)).sum())

    @property
    def dim(self) -> int:
        return self.cov.dimension

    @property
    def precision(self) -> np.ndarray:
        return self._prec

    def logpdf(self, x):
        x = self._check(x)
        q = np.einsum("...i,ij,...j->...", x, self._prec, x)
        return -0.5 * q - 0.5 * self._logdet - 0.5 * self.dim * _LOG_2PI

    def sample(self, rng, count):
        z = rng.standard_normal((count, self.dim))
        return z @ self._chol.T

    def to_json(self):
        return {"kind": "mvn", "cov": self.cov.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class Product(JointDensity):
    """Independent blocks laid out consecutively."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise SpecError("product density needs at least one block")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "_offsets", np.cumsum([0] + [b.dim for b in blocks]))

    @property
    def dim(self) -> int:
        return int(self._offsets[-1])

    def _slices(self):
        for b, lo, hi in zip(self.blocks, self._offsets[:-1], self._offsets[1:]):
            yield b, slice(int(lo), int(hi))

    def logpdf(self, x):
        x = self._check(x)
        return sum(b.logpdf(x[..., s]) for b, s in self._slices())

    def sample(self, rng, count):
        return np.concatenate([b.sample(rng, count) for b in self.blocks], axis=1)

    def breakpoints_along(self, direction):
        d = np.asarray(direction, dtype=float)
        parts = [b.breakpoints_along(d[s]) for b, s in self._slices()]
        return np.unique(np.concatenate(parts))

    def to_json(self):
        return {"kind": "product", "blocks": [b.to_json() for b in self.blocks]}


@dataclass(frozen=True, eq=False)
class Custom(JointDensity):
    """User-supplied density.

    ``pdf`` must accept arrays of shape ``(..., dim)`` and ``sampler`` is
    called as ``sampler(rng, count)`` returning ``(count, dim)``.
    """

    pdf_fn: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    n: int

    @property
    def dim(self) -> int:
        return int(self.n)

    def logpdf(self, x):
        x = self._check(x)
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self.pdf_fn(x), dtype=float))

    def sample(self, rng, count):
        out = np.asarray(self.sampler(rng, count), dtype=float)
        if out.shape != (count, self.dim):
            raise SpecError(f"custom sampler returned shape {out.shape}, expected {(count, self.dim)}")
        return out

    def to_json(self):
        raise SpecError("custom densities cannot be serialised")


def pdf_joint(g: JointDensity, x) -> np.ndarray | float:
    out = g.pdf(x)
    return float(out) if np.ndim(out) == 0 else out


def sample(g: JointDensity, rng: np.random.Generator | int, count: int) -> np.ndarray:
    """Draw ``count`` independent rows from ``g``.

    Passing an integer seeds a fresh generator, so identical seeds give
    bit-identical output.
    """
    if int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return g.sample(rng, int(count))


def from_json(obj: Mapping[str, Any] | str) -> JointDensity:
    """Build a density from the JSON schema used by the command line."""
    import json

    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise SpecError(f"density spec is not valid JSON: {exc}") from None
    if not isinstance(obj, Mapping):
        raise SpecError("density spec must be a JSON object")
    kind = obj.get("kind")
    try:
        if kind == "iid":
            return IID(MarginalFamily(obj["family"], obj.get("params", {})), int(obj["n"]))
        if kind == "mvn":
            return MVN(CovarianceSpec(np.asarray(obj["cov"], dtype=float)))
        if kind == "product":
            return Product(tuple(from_json(b) for b in obj["blocks"]))
    except KeyError as exc:
        raise SpecError(f"density spec of kind {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad density spec: {exc}") from None
    raise SpecError(f"unknown density kind {kind!r}")
