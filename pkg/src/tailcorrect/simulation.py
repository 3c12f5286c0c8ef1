"""Simulation harness: empirical CDFs of raw and corrected p-values.

N data vectors are drawn from g; each gives a statistic t*, a raw p-value
t(t*) and a corrected one K_g t(t*). Their empirical CDFs are tabulated on a
grid over the window [0, 1/r], where the zoom factor r selects how deep
into the tail to look. With N = 10000 r about 10^4 p-values land in the
window under uniformity.

Work is split into fixed-size chunks, chunk i drawing from a generator
seeded by (seed, i). Each chunk reduces to integer histogram counts, so the
result does not depend on how many threads process the chunks.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .densities import IID, MVN, CovarianceSpec, JointDensity, MarginalFamily
from .errors import EmptyExceedanceError, SpecError, TailCorrectError
from .kg import KgResult, TestSpec, compute_kg
from .statistics import raw_pvalues, statistic_batch
from .tails import t_tail

DEFAULT_CHUNK = 2**18
_MAX_RESAMPLE_ROUNDS = 100


@dataclass
class SimConfig:
    """One simulation: which test, which density, how deep into the tail."""

    spec: TestSpec
    density: JointDensity
    zoom: int = 1000
    n_samples: int | None = None
    seed: int = 0
    grid_points: int = 512
    name: str = ""
    notes: str = ""

    def __post_init__(self):
        if int(self.zoom) != self.zoom or self.zoom < 1:
            raise SpecError(f"zoom factor must be a positive integer, got {self.zoom}")
        self.zoom = int(self.zoom)
        if self.n_samples is None:
            self.n_samples = 10_000 * self.zoom
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise SpecError(f"n_samples must be a positive integer, got {self.n_samples}")
        self.n_samples = int(self.n_samples)
        if self.grid_points < 1:
            raise SpecError("grid_points must be positive")
        if self.density.dim != self.spec.dim:
            raise SpecError(f"density dimension {self.density.dim} does not match "
                            f"{self.spec.kind} test of size {self.spec.dim}")

    @property
    def grid(self) -> np.ndarray:
        """Equispaced points q_j = j / (grid_points r), j = 1..grid_points."""
        j = np.arange(1, self.grid_points + 1)
        return j / (self.grid_points * self.zoom)

    def with_overrides(self, **kw) -> "SimConfig":
        # a new zoom resets N to its 10000 r default unless N is also given
        n_samples = None if kw.get("zoom") is not None else self.n_samples
        fields = {"spec": self.spec, "density": self.density, "zoom": self.zoom,
                  "n_samples": n_samples, "seed": self.seed, "grid_points": self.grid_points,
                  "name": self.name, "notes": self.notes}
        fields.update({k: v for k, v in kw.items() if v is not None})
        return SimConfig(**fields)

    def to_json(self) -> dict:
        out = {"name": self.name, "test": self.spec.to_json(), "zoom": self.zoom,
               "n_samples": self.n_samples, "seed": self.seed, "grid_points": self.grid_points}
        try:
            out["density"] = self.density.to_json()
        except TailCorrectError:
            out["density"] = "custom"
        if self.notes:
            out["notes"] = self.notes
        return out


@dataclass
class ECdfSeries:
    grid: np.ndarray
    ecdf_raw: np.ndarray
    ecdf_corrected: np.ndarray
    ecdf_welch: np.ndarray | None
    counts: dict
    n_samples: int
    degeneracy_count: int
    kg: float
    runtime: float = 0.0
    kept_pvalues: np.ndarray | None = field(default=None, repr=False)

    def ratio_at(self, q: float, which: str = "corrected") -> float:
        """ecdf(q) / q at the grid point nearest q."""
        j = int(np.argmin(np.abs(self.grid - q)))
        return float(getattr(self, f"ecdf_{which}")[j] / self.grid[j])

    def binomial_se(self, q: float) -> float:
        """Standard error of an eCDF value at q under exact uniformity."""
        return math.sqrt(q * (1.0 - q) / self.n_samples)

    def to_csv(self) -> str:
        cols = [self.grid, self.ecdf_raw, self.ecdf_corrected]
        header = "q,ecdf_raw,ecdf_corrected"
        if self.ecdf_welch is not None:
            cols.append(self.ecdf_welch)
            header += ",ecdf_welch"
        lines = [header]
        for row in zip(*cols):
            lines.append(",".join("%.12g" % v for v in row))
        return "\n".join(lines) + "\n"

    def sidecar(self, cfg: SimConfig) -> dict:
        return {"config": cfg.to_json(), "seed": cfg.seed, "kg": self.kg,
                "n_samples": self.n_samples, "counts_in_window": self.counts,
                "degeneracy_count": self.degeneracy_count, "runtime_seconds": self.runtime}


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(index,)))


def _draw_statistics(cfg: SimConfig, rng, count):
    """Statistics of ``count`` draws, redrawing degenerate ones from the same stream."""
    data = cfg.density.sample(rng, count)
    t, bad, df = statistic_batch(cfg.spec, data)
    resampled = 0
    rounds = 0
    while bad.any():
        idx = np.flatnonzero(bad)
        resampled += idx.size
        rounds += 1
        if rounds > _MAX_RESAMPLE_ROUNDS:
            raise TailCorrectError("density keeps producing zero-variance samples")
        t2, bad2, df2 = statistic_batch(cfg.spec, cfg.density.sample(rng, idx.size))
        t[idx] = t2
        if df is not None:
            df[idx] = df2
        bad[idx] = bad2
    return t, df, resampled


def _window_counts(p, grid):
    """Histogram of p over the grid cells (grid[j-1], grid[j]] (first cell from 0)."""
    inside = p <= grid[-1]
    idx = np.searchsorted(grid, p[inside], side="left")
    return np.bincount(idx, minlength=grid.size).astype(np.int64)


def _run_chunk(cfg: SimConfig, kg: float, grid, index, count, keep_below):
    t, df, resampled = _draw_statistics(cfg, _chunk_rng(cfg.seed, index), count)
    p_raw = raw_pvalues(cfg.spec, t)
    out = {"raw": _window_counts(p_raw, grid),
           "corrected": _window_counts(kg * p_raw, grid),
           "resampled": resampled}
    if df is not None:
        out["welch"] = _window_counts(t_tail(df, t), grid)
    if keep_below is not None:
        out["kept"] = p_raw[p_raw <= keep_below]
    return out


def run_simulation(cfg: SimConfig, kg: KgResult | float | None = None, *, threads: int = 1,
                   chunk_size: int = DEFAULT_CHUNK,
                   keep_pvalues_below: float | None = None) -> ECdfSeries:
    """Simulate ``cfg.n_samples`` statistics and tabulate the p-value eCDFs.

    ``kg`` defaults to :func:`compute_kg` for the configured density and test.
    ``keep_pvalues_below`` additionally returns the sorted raw p-values at or
    below that level, for slope estimation. ``chunk_size`` is part of the
    random stream definition: results are reproducible for a fixed chunk
    size, independent of ``threads``.
    """
    start = time.perf_counter()
    if kg is None:
        kg = compute_kg(cfg.density, cfg.spec)
    kval = kg.value if isinstance(kg, KgResult) else float(kg)
    grid = cfg.grid
    sizes = [chunk_size] * (cfg.n_samples // chunk_size)
    if cfg.n_samples % chunk_size:
        sizes.append(cfg.n_samples % chunk_size)

    def job(i):
        return _run_chunk(cfg, kval, grid, i, sizes[i], keep_pvalues_below)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(len(sizes))))
    else:
        results = [job(i) for i in range(len(sizes))]

    N = cfg.n_samples
    cum = {}
    for key in ("raw", "corrected", "welch"):
        if key in results[0]:
            cum[key] = np.cumsum(sum(r[key] for r in results))
    kept = None
    if keep_pvalues_below is not None:
        kept = np.sort(np.concatenate([r["kept"] for r in results]))
    return ECdfSeries(
        grid=grid,
        ecdf_raw=cum["raw"] / N,
        ecdf_corrected=cum["corrected"] / N,
        ecdf_welch=cum["welch"] / N if "welch" in cum else None,
        counts={k: int(v[-1]) for k, v in cum.items()},
        n_samples=N,
        degeneracy_count=int(sum(r["resampled"] for r in results)),
        kg=kval,
        runtime=time.perf_counter() - start,
        kept_pvalues=kept,
    )


def write_outputs(series: ECdfSeries, cfg: SimConfig, csv_path, sidecar_path=None) -> None:
    """Write the eCDF table and its JSON sidecar (default: ``<csv>.json``)."""
    with open(csv_path, "w", newline="") as fh:
        fh.write(series.to_csv())
    sidecar_path = sidecar_path or f"{csv_path}.json"
    with open(sidecar_path, "w") as fh:
        json.dump(series.sidecar(cfg), fh, indent=2)


# ------------------------------------------------------------ slope estimate


@dataclass(frozen=True)
class SlopeEstimate:
    """K_g estimated as the slope of the p-value CDF at the origin."""

    kg_hat: float
    tau: float
    count_below: int
    standard_error: float
    n_total: int
    kg_hat_small: float | None = None
    standard_error_small: float | None = None
    inconsistent: bool = False

    def to_json(self) -> dict:
        return {"kg_hat": self.kg_hat, "tau": self.tau, "count_below": self.count_below,
                "standard_error": self.standard_error, "n_total": self.n_total,
                "check_tau": self.tau / 5.0, "kg_hat_check": self.kg_hat_small,
                "standard_error_check": self.standard_error_small,
                "inconsistent": self.inconsistent}


def default_tau(n_total: int) -> float:
    """Threshold expecting about 10 exceedances, capped at 1e-2 for large N."""
    floor = 10.0 / n_total
    return float(max(floor, min(floor * max(1.0, n_total / 1000.0), 1e-2)))


def _slope(p, n_total, tau):
    count = int(np.searchsorted(p, tau, side="right"))
    return count, count / (n_total * tau), math.sqrt(count) / (n_total * tau)


def estimate_kg_slope(pvalues, tau: float | None = None, *, n_total: int | None = None) -> SlopeEstimate:
    """kg_hat = #{p <= tau} / (N tau) with its binomial standard error.

    ``pvalues`` may be truncated to the small ones as long as ``n_total``
    gives the number of p-values originally simulated. The estimate is
    flagged inconsistent when it differs from the one at tau/5 by more than
    three combined standard errors, a sign that tau is outside the linear
    part of the CDF.
    """
    p = np.sort(np.asarray(pvalues, dtype=float).ravel())
    if p.size and (p[0] < 0 or p[-1] > 1 or np.isnan(p).any()):
        raise SpecError("p-values must lie in [0, 1]")
    N = p.size if n_total is None else int(n_total)
    if N < p.size or N < 1:
        raise SpecError("n_total must be at least the number of p-values supplied")
    tau = default_tau(N) if tau is None else float(tau)
    if not 0 < tau < 1:
        raise SpecError(f"tau must lie in (0, 1), got {tau}")
    count, kg_hat, se = _slope(p, N, tau)
    if count == 0:
        raise EmptyExceedanceError(f"no p-value at or below tau={tau:g}")
    c5, k5, se5 = _slope(p, N, tau / 5.0)
    if c5 == 0:
        return SlopeEstimate(kg_hat, tau, count, se, N)
    bad = abs(kg_hat - k5) > 3.0 * math.hypot(se, se5)
    return SlopeEstimate(kg_hat, tau, count, se, N, k5, se5, bool(bad))


def write_pvalues(path, pvalues, n_total: int) -> None:
    """One p-value per line, preceded by a ``# n_total=N`` header."""
    with open(path, "w") as fh:
        fh.write(f"# n_total={int(n_total)}\n")
        for v in np.asarray(pvalues, dtype=float):
            fh.write("%.17g\n" % v)


def read_pvalues(path) -> tuple[np.ndarray, int | None]:
    """Read p-values separated by whitespace or commas; ``#`` starts a comment.

    Returns the values and the ``n_total`` header if present.
    """
    vals, n_total = [], None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n_total="):
                    n_total = int(body.split("=", 1)[1])
                continue
            for tok in line.replace(",", " ").split():
                vals.append(float(tok))
    return np.asarray(vals, dtype=float), n_total


# ---------------------------------------------------------------- scenarios

_SIZES = ((2, 2), (2, 3), (3, 5))


def _iid(family, n, **params):
    return IID(MarginalFamily(family, params), n)


def sigma1_matrix(sigma=(1.0, 1.0, 1.0), rho=0.5) -> np.ndarray:
    """3 x 3 tridiagonal covariance: neighbours correlated, ends independent."""
    s1, s2, s3 = sigma
    return np.array([[s1 * s1, rho * s1 * s2, 0.0],
                     [rho * s1 * s2, s2 * s2, rho * s2 * s3],
                     [0.0, rho * s2 * s3, s3 * s3]])


def sigma2_matrix(sigma=(1.0, 1.0, 1.0), rho=0.5) -> np.ndarray:
    """5 x 5 block covariance: a 2-block (first sample) and a 3-block (second)."""
    s1, s2, _ = sigma
    out = np.zeros((5, 5))
    out[:2, :2] = [[s1 * s1, rho * s1 * s2], [rho * s1 * s2, s2 * s2]]
    out[2:, 2:] = sigma1_matrix(sigma, rho)
    return out


_FIG6_ROWS = (("rho-pos", (1.0, 1.0, 1.0), 0.5),
              ("rho-neg", (1.0, 1.0, 1.0), -0.5),
              ("unequal-var", (1.0, 2.0, 3.0), 0.0))


def builtin_scenarios() -> list[SimConfig]:
    """The standard study matrix, grouped by figure-style prefix.

    fig2: one-sample t, fig3: two-sample t, fig4: F test, fig5: Welch at three
    zoom depths, fig6: dependent normal data. The correlation and variance
    values of the fig6 group are chosen defaults, recorded in each
    scenario's ``notes``.
    """
    out = []
    for fam, tag in (("uniform", "uniform"), ("centered-exponential", "centered-exponential"),
                     ("cauchy", "cauchy")):
        for n in (2, 3, 5):
            out.append(SimConfig(TestSpec.ost(n), _iid(fam, n), name=f"fig2-{tag}-n{n}"))
    for fig, kind, fams in (("fig3", "tst", (("uniform", {}), ("exponential", {}),
                                             ("student-t", {"nu": 2.0}))),
                            ("fig4", "f", (("uniform", {}), ("exponential", {}),
                                           ("student-t", {"nu": 5.0})))):
        for fam, params in fams:
            tag = fam if fam != "student-t" else f"t{int(params['nu'])}"
            for n1, n2 in _SIZES:
                out.append(SimConfig(TestSpec(kind, n1=n1, n2=n2), _iid(fam, n1 + n2, **params),
                                     name=f"{fig}-{tag}-{n1}-{n2}"))
    for n1, n2 in _SIZES:
        for zoom, suffix in ((1000, ""), (10, "-z10"), (100_000, "-z100000")):
            out.append(SimConfig(TestSpec.welch(n1, n2), _iid("normal", n1 + n2), zoom=zoom,
                                 name=f"fig5-welch-{n1}-{n2}{suffix}"))
    for row, sigma, rho in _FIG6_ROWS:
        note = f"default parameters sigma={sigma}, rho={rho}"
        c1 = MVN(CovarianceSpec(sigma1_matrix(sigma, rho)))
        c2 = MVN(CovarianceSpec(sigma2_matrix(sigma, rho)))
        out.append(SimConfig(TestSpec.ost(3), c1, name=f"fig6-ost-{row}", notes=note))
        out.append(SimConfig(TestSpec.tst(2, 3), c2, name=f"fig6-tst-{row}", notes=note))
        out.append(SimConfig(TestSpec.f(2, 3), c2, name=f"fig6-f-{row}", notes=note))
    return out


def get_scenario(name: str) -> SimConfig:
    for cfg in builtin_scenarios():
        if cfg.name == name:
            return cfg
    raise SpecError(f"unknown scenario {name!r}")


__all__ = [
    "DEFAULT_CHUNK", "ECdfSeries", "SimConfig", "SlopeEstimate", "builtin_scenarios",
    "default_tau", "estimate_kg_slope", "get_scenario", "read_pvalues", "run_simulation",
    "sigma1_matrix", "sigma2_matrix", "write_outputs", "write_pvalues",
]
