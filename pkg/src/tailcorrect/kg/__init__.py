"""Tail constants K_g: closed forms, quadrature, Monte Carlo and error bounds."""

from __future__ import annotations

from ..densities import JointDensity
from ..errors import SpecError
from .closed_form import (TABLE1_FAMILIES, TABLE2, TABLE3, closed_form_kg, gaussian_covariance,
                          is_block_independent, kg_f_spherical, kg_ost_gaussian_closed,
                          table1_kg, table2_kg, table3_kg)
from .numeric import (kg_f_gaussian, kg_f_integral, kg_f_quadrature_n1_2, kg_ost_quadrature,
                      kg_tst_gaussian, kg_tst_quadrature)
from .spec import (ErrorBound, KgResult, OrthogonalFrame, TestSpec, build_orthogonal_frame,
                   unit_directions)

METHODS = ("auto", "closed-form", "quadrature", "monte-carlo")


def kg_ost_gaussian(cov) -> KgResult:
    """One-sample K_g of a zero-mean normal with covariance ``cov``."""
    cov = getattr(cov, "matrix", cov)
    return KgResult(kg_ost_gaussian_closed(cov), "closed-form", 0.0, {"source": "gaussian-ost"})


def compute_kg(g: JointDensity, spec: TestSpec, method: str = "auto", *,
               mc_samples: int = 10**6, seed: int = 0, tol: float | None = None) -> KgResult:
    """K_g by the cheapest applicable route.

    ``auto`` tries a closed form first, then deterministic quadrature, then
    Monte Carlo (the only general route for the F test).
    """
    if method not in METHODS:
        raise SpecError(f"unknown method {method!r}; choose from {METHODS}")
    if g.dim != spec.dim:
        raise SpecError(f"density has dimension {g.dim}, {spec.kind} test needs {spec.dim}")

    if method in ("auto", "closed-form"):
        found = closed_form_kg(g, spec)
        if found is not None:
            return KgResult(found[0], "closed-form", 0.0, {"source": found[1]})
        if method == "closed-form":
            raise SpecError("no closed form is known for this density and test")

    if method in ("auto", "quadrature"):
        kw = {} if tol is None else {"epsrel": tol}
        if spec.kind == "ost":
            return kg_ost_quadrature(g, spec.n, **kw)
        if spec.kind in ("tst", "welch"):
            cov = gaussian_covariance(g)
            if cov is not None:
                return kg_tst_gaussian(cov, spec, **kw)
            return kg_tst_quadrature(g, spec, **kw)
        if spec.n1 == 2 and method == "quadrature":
            return kg_f_quadrature_n1_2(g, spec.n2, **kw)
        if method == "quadrature":
            raise SpecError("deterministic quadrature for the F test needs n1 = 2")

    if spec.kind != "f":
        raise SpecError("Monte Carlo is only used for the F test")
    cov = gaussian_covariance(g)
    if cov is not None and is_block_independent(cov, spec.n1):
        return kg_f_gaussian(cov[:spec.n1, :spec.n1], cov[spec.n1:, spec.n1:],
                             mc_samples, seed=seed)
    return kg_f_integral(g, spec.n1, spec.n2, mc_samples, seed=seed)


__all__ = [
    "ErrorBound", "KgResult", "METHODS", "OrthogonalFrame", "TABLE1_FAMILIES", "TABLE2", "TABLE3",
    "TestSpec", "build_orthogonal_frame", "closed_form_kg", "compute_kg", "gaussian_covariance",
    "kg_f_gaussian", "kg_f_integral", "kg_f_quadrature_n1_2", "kg_f_spherical", "kg_ost_gaussian",
    "kg_ost_quadrature", "kg_tst_gaussian", "kg_tst_quadrature", "table1_kg", "table2_kg",
    "table3_kg", "unit_directions",
]
