"""How far out is "the tail"?

K_g t(u) is a limit statement. The bound d(u) caps the absolute error at a
finite threshold u, and C3 gives the leading relative error, roughly
C3 / u^2 for t statistics. For two Cauchy observations the exact tail
probability is available by two-dimensional quadrature, so the
approximation can be compared with the truth directly.
"""

import math

import numpy as np
from scipy import integrate

from tailcorrect import IID, MarginalFamily, TestSpec, error_bounds, t_tail

spec, g = TestSpec.ost(2), IID(MarginalFamily("cauchy"), 2)
K = 2 / math.pi


def exact_tail(u):
    # T = a / |b| with a, b the rotated coordinates (x1 +- x2) / sqrt(2)
    h = 1 / math.sqrt(2)

    def dens(a, b):
        return 1 / (math.pi ** 2 * (1 + (h * (a + b)) ** 2) * (1 + (h * (a - b)) ** 2))

    inner = lambda b: integrate.quad(lambda a: dens(a, b), u * abs(b), np.inf, epsrel=1e-12)[0]
    return 2 * sum(integrate.quad(inner, lo, hi, epsrel=1e-11)[0] for lo, hi in ((0, 1), (1, np.inf)))


print("   u     exact P(T>u)   K t_1(u)    rel.err   C3/u^2     d(u)")
for u in (3.0, 5.0, 10.0, 20.0, 40.0):
    p = exact_tail(u)
    approx = K * t_tail(1, u)
    b = error_bounds(spec, g, u)
    print(f"{u:5g} {p:14.6e} {approx:11.6e} {p / approx - 1:+9.4f} {b.C3 / u ** 2:+9.4f} "
          f"{b.d_value:9.2e}")
