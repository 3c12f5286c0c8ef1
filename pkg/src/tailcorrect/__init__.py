"""Extreme-tail constants for t and F statistics under non-normal data.

Under a data density g the upper tail of a one- or two-sample t, Welch or
F statistic behaves like P(T > u) ~ K_g t(u), where t(u) is the nominal
normal-theory tail. This package computes K_g (closed forms, quadrature,
Monte Carlo), corrects p-values with it, bounds the finite-u error, and
simulates the p-value distribution to check it.
"""

__version__ = "0.1.0"

from .densities import (IID, MVN, CovarianceSpec, Custom, JointDensity, MarginalFamily, Product,
                        from_json, pdf_joint, pdf_marginal, sample)
from .errors import (BudgetError, DegenerateSampleError, DivergenceError, EmptyExceedanceError,
                     ExpansionDomainError, FiniteDifferenceError, SpecError, TailCorrectError)
from .kg import (ErrorBound, KgResult, TestSpec, build_orthogonal_frame, compute_kg,
                 kg_f_integral, kg_ost_gaussian, kg_ost_quadrature, kg_tst_gaussian,
                 kg_tst_quadrature)
from .kg.bounds import error_bounds, eval_G
from .simulation import (ECdfSeries, SimConfig, SlopeEstimate, builtin_scenarios,
                         estimate_kg_slope, get_scenario, run_simulation, write_outputs)
from .statistics import (PValuePair, StatisticValue, f_statistic, ost_statistic, pvalues,
                         tst_statistic, welch_df, welch_statistic)
from .tails import (ReferenceTail, ShrinkBallContext, f_tail, f_tail_expansion, shrink_ball_K,
                    shrink_ball_bound, shrink_ball_second_order, t_tail, vol_unit_ball)

__all__ = [
    "BudgetError", "CovarianceSpec", "Custom", "DegenerateSampleError", "DivergenceError",
    "ECdfSeries", "EmptyExceedanceError", "ErrorBound", "ExpansionDomainError",
    "FiniteDifferenceError", "IID", "JointDensity", "KgResult", "MVN", "MarginalFamily",
    "PValuePair", "Product", "ReferenceTail", "ShrinkBallContext", "SimConfig", "SlopeEstimate",
    "SpecError", "StatisticValue", "TailCorrectError", "TestSpec", "__version__",
    "build_orthogonal_frame", "builtin_scenarios", "compute_kg", "error_bounds",
    "estimate_kg_slope", "eval_G", "f_statistic", "f_tail", "f_tail_expansion", "from_json",
    "get_scenario", "kg_f_integral", "kg_ost_gaussian", "kg_ost_quadrature", "kg_tst_gaussian",
    "kg_tst_quadrature", "ost_statistic", "pdf_joint", "pdf_marginal", "pvalues",
    "run_simulation", "sample", "shrink_ball_K", "shrink_ball_bound", "shrink_ball_second_order",
    "t_tail", "tst_statistic", "vol_unit_ball", "welch_df", "welch_statistic", "write_outputs",
]
