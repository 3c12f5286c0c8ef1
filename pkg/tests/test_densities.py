import math

import numpy as np
import pytest
from scipy import integrate, stats

from tailcorrect.densities import (FAMILIES, IID, MVN, CovarianceSpec, Custom, MarginalFamily,
                                   Product, from_json, pdf_joint, pdf_marginal, sample)
from tailcorrect.errors import SpecError


def _normalisation(m):
    lo, hi = m.support()
    lo = -np.inf if not math.isfinite(lo) else lo
    hi = np.inf if not math.isfinite(hi) else hi
    mode_guess = [p for p in (0.0, 1.0) if lo < p < hi]
    f = lambda x: float(m.pdf(x))
    if math.isfinite(lo) and math.isfinite(hi):
        return integrate.quad(f, lo, hi, points=mode_guess or None, epsabs=1e-13, limit=400)[0]
    split = mode_guess[0] if mode_guess else (lo if math.isfinite(lo) else hi)
    left = integrate.quad(f, lo, split, epsabs=1e-13, limit=400)[0] if lo < split else 0.0
    right = integrate.quad(f, split, hi, epsabs=1e-13, limit=400)[0] if split < hi else 0.0
    return left + right


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_every_family_integrates_to_one(family):
    assert _normalisation(MarginalFamily(family)) == pytest.approx(1.0, abs=1e-8)


# independent parameterisation oracles from scipy.stats
SCIPY_EQUIVALENTS = [
    ("normal", {"mu": 0.3, "sigma": 1.7}, stats.norm(0.3, 1.7)),
    ("half-normal", {"sigma": 2.0}, stats.halfnorm(scale=2.0)),
    ("log-normal", {"mu": 0.2, "sigma": 0.5}, stats.lognorm(0.5, scale=math.exp(0.2))),
    ("chi", {"nu": 3}, stats.chi(3)),
    ("chi-squared", {"nu": 4}, stats.chi2(4)),
    ("inverse-chi-squared", {"nu": 4}, stats.invgamma(2.0, scale=0.5)),
    ("f", {"mu": 4, "nu": 6}, stats.f(4, 6)),
    ("student-t", {"nu": 5}, stats.t(5)),
    ("cauchy", {}, stats.cauchy()),
    ("beta", {"alpha": 2, "beta": 3}, stats.beta(2, 3)),
    ("gamma", {"alpha": 2.5, "theta": 2.0}, stats.gamma(2.5, scale=2.0)),
    ("inverse-gamma", {"alpha": 3, "theta": 2.0}, stats.invgamma(3, scale=2.0)),
    ("uniform", {"a": -1, "b": 2}, stats.uniform(-1, 3)),
    ("exponential", {"lam": 2.0}, stats.expon(scale=0.5)),
    ("centered-exponential", {"lam": 2.0}, stats.expon(loc=-0.5, scale=0.5)),
    ("maxwell", {"sigma": 1.5}, stats.maxwell(scale=1.5)),
    ("pareto", {"k": 1.5, "alpha": 2.0}, stats.pareto(2.0, scale=1.5)),
]


@pytest.mark.parametrize("family,params,ref", SCIPY_EQUIVALENTS, ids=[s[0] for s in SCIPY_EQUIVALENTS])
def test_pdf_matches_scipy(family, params, ref):
    x = np.linspace(-3, 8, 97)
    np.testing.assert_allclose(pdf_marginal(MarginalFamily(family, params), x), ref.pdf(x),
                               rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("family,params,ref", SCIPY_EQUIVALENTS, ids=[s[0] for s in SCIPY_EQUIVALENTS])
def test_sampler_matches_distribution(family, params, ref):
    x = MarginalFamily(family, params).sample(np.random.default_rng(5), 20000)
    assert stats.kstest(x, ref.cdf).pvalue > 1e-4


def test_marginal_examples():
    assert pdf_marginal(MarginalFamily("normal"), 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert pdf_marginal(MarginalFamily("cauchy"), 0.0) == pytest.approx(1 / math.pi)
    assert pdf_marginal(MarginalFamily("exponential", {"lam": 1}), -1.0) == 0.0


def test_nan_is_an_error():
    with pytest.raises(ValueError):
        pdf_marginal(MarginalFamily("normal"), float("nan"))


@pytest.mark.parametrize("family,params", [
    ("beta", {"alpha": 1.0}), ("beta", {"beta": 0.5}), ("chi-squared", {"nu": 1}),
    ("uniform", {"a": 1, "b": 0}), ("normal", {"sigma": -1}), ("gamma", {"alpha": 1.0}),
    ("pareto", {"k": 0}), ("student-t", {"nu": 0}), ("normal", {"bogus": 1}),
])
def test_parameter_constraints(family, params):
    with pytest.raises(SpecError):
        MarginalFamily(family, params)


def test_unknown_family():
    with pytest.raises(SpecError):
        MarginalFamily("levy")


def test_joint_examples():
    iid = IID(MarginalFamily("normal"), 2)
    mvn = MVN(CovarianceSpec(np.eye(2)))
    assert pdf_joint(iid, [0, 0]) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert pdf_joint(mvn, [0, 0]) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert pdf_joint(IID(MarginalFamily("uniform"), 3), [0, 0, 2]) == 0.0


def test_dimension_mismatch():
    with pytest.raises(SpecError):
        pdf_joint(IID(MarginalFamily("normal"), 3), [0.0, 0.0])


def test_iid_is_product_of_marginals():
    m = MarginalFamily("gamma", {"alpha": 3, "theta": 0.7})
    g = IID(m, 4)
    x = np.random.default_rng(0).gamma(3, 0.7, size=(50, 4))
    np.testing.assert_allclose(g.pdf(x), np.exp(np.log(m.pdf(x)).sum(axis=1)), rtol=1e-12)


def test_mvn_density_at_zero():
    cov = np.array([[2.0, 0.3, 0.1], [0.3, 1.0, -0.2], [0.1, -0.2, 0.5]])
    g = MVN(CovarianceSpec(cov))
    expected = (2 * math.pi) ** -1.5 / math.sqrt(np.linalg.det(cov))
    assert pdf_joint(g, np.zeros(3)) == pytest.approx(expected, rel=1e-12)
    x = np.random.default_rng(1).normal(size=(20, 3))
    np.testing.assert_allclose(g.pdf(x), stats.multivariate_normal(np.zeros(3), cov).pdf(x),
                               rtol=1e-12)


def test_covariance_validation():
    with pytest.raises(SpecError):
        CovarianceSpec(np.array([[1.0, 0.5], [0.4, 1.0]]))
    with pytest.raises(SpecError):
        CovarianceSpec(np.array([[1.0, 2.0], [2.0, 1.0]]))
    c = CovarianceSpec(np.eye(2))
    with pytest.raises(ValueError):
        c.matrix[0, 0] = 3.0


def test_product_multiplies_blocks():
    a = IID(MarginalFamily("uniform"), 2)
    b = MVN(CovarianceSpec(np.array([[1.0, 0.5], [0.5, 2.0]])))
    g = Product((a, b))
    x = np.array([0.1, -0.4, 0.3, 1.2])
    assert pdf_joint(g, x) == pytest.approx(pdf_joint(a, x[:2]) * pdf_joint(b, x[2:]), rel=1e-14)


def test_sampling_reproducible_and_count_checked():
    g = IID(MarginalFamily("cauchy"), 3)
    np.testing.assert_array_equal(sample(g, 42, 1), sample(g, 42, 1))
    assert sample(g, 42, 1).shape == (1, 3)
    with pytest.raises(ValueError):
        sample(g, 42, 0)


def test_sampling_moments():
    u = sample(IID(MarginalFamily("uniform"), 1), 3, 10**5)
    assert abs(u.mean()) < 4 * math.sqrt(1 / 3 / 1e5)
    x = sample(MVN(CovarianceSpec.diagonal([1.0, 4.0])), 4, 10**5)
    np.testing.assert_allclose(x.var(axis=0, ddof=1), [1.0, 4.0], rtol=0.05)


@pytest.mark.slow
@pytest.mark.parametrize("family", ["normal", "exponential", "beta", "chi"])
def test_histogram_total_variation(family):
    m = MarginalFamily(family)
    x = m.sample(np.random.default_rng(11), 10**6)
    lo, hi = np.quantile(x, [0.001, 0.999])
    counts, edges = np.histogram(x, bins=100, range=(lo, hi))
    mass = np.array([integrate.quad(lambda t: float(m.pdf(t)), a, b)[0]
                     for a, b in zip(edges[:-1], edges[1:])])
    assert 0.5 * np.abs(counts / x.size - mass).sum() < 0.02


def test_json_round_trip():
    spec = {"kind": "product", "blocks": [
        {"kind": "iid", "family": "cauchy", "params": {}, "n": 2},
        {"kind": "mvn", "cov": [[1.0, 0.2], [0.2, 1.0]]}]}
    g = from_json(spec)
    assert g.dim == 4
    assert from_json(g.to_json()).to_json() == g.to_json()
    for bad in ('{"kind": "iid"}', "not json", '{"kind": "weird"}', "[1, 2]"):
        with pytest.raises(SpecError):
            from_json(bad)


def test_custom_density():
    g = Custom(lambda x: np.exp(-0.5 * (x ** 2).sum(-1)) / (2 * math.pi),
               lambda rng, k: rng.standard_normal((k, 2)), 2)
    assert pdf_joint(g, [0, 0]) == pytest.approx(1 / (2 * math.pi))
    assert sample(g, 0, 5).shape == (5, 2)
    bad = Custom(lambda x: x[..., 0], lambda rng, k: np.zeros((k, 3)), 2)
    with pytest.raises(SpecError):
        sample(bad, 0, 2)
