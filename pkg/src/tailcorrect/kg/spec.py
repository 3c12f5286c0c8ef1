"""Test specifications, orthogonal frames and result containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import SpecError
from ..tails import ReferenceTail

_KIND_ALIASES = {
    "ost": "ost", "one-sample-t": "ost", "one-sample": "ost",
    "tst": "tst", "two-sample-t": "tst", "two-sample": "tst", "student": "tst",
    "welch": "welch",
    "f": "f", "f-test": "f",
}


@dataclass(frozen=True)
class TestSpec:
    """Which statistic T is computed and from how many observations.

    ``ost`` uses ``n``; the two-sample kinds (``tst``, ``welch``, ``f``) use
    ``n1`` and ``n2``.
    """

    __test__ = False  # keep pytest from collecting this class

    kind: str
    n: int | None = None
    n1: int | None = None
    n2: int | None = None

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise SpecError(f"unknown test kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "ost":
            if self.n is None or int(self.n) != self.n or self.n < 2:
                raise SpecError(f"one-sample test needs integer n >= 2, got {self.n}")
            object.__setattr__(self, "n", int(self.n))
        else:
            for name in ("n1", "n2"):
                v = getattr(self, name)
                if v is None or int(v) != v or v < 2:
                    raise SpecError(f"{kind} test needs integer {name} >= 2, got {v}")
                object.__setattr__(self, name, int(v))
            if self.n is not None and self.n != self.n1 + self.n2:
                raise SpecError("n must equal n1 + n2")
            object.__setattr__(self, "n", self.n1 + self.n2)

    @classmethod
    def ost(cls, n: int) -> "TestSpec":
        return cls("ost", n=n)

    @classmethod
    def tst(cls, n1: int, n2: int) -> "TestSpec":
        return cls("tst", n1=n1, n2=n2)

    @classmethod
    def welch(cls, n1: int, n2: int) -> "TestSpec":
        return cls("welch", n1=n1, n2=n2)

    @classmethod
    def f(cls, n1: int, n2: int) -> "TestSpec":
        return cls("f", n1=n1, n2=n2)

    @property
    def dim(self) -> int:
        return self.n

    @property
    def weights(self) -> tuple[float, float]:
        """Variance weights (alpha, beta) in the two-sample denominator."""
        if self.kind == "tst":
            s = 1.0 / self.n1 + 1.0 / self.n2
            return (self.n1 - 1) / (self.n - 2) * s, (self.n2 - 1) / (self.n - 2) * s
        if self.kind == "welch":
            return 1.0 / self.n1, 1.0 / self.n2
        raise SpecError(f"{self.kind} test has no variance weights")

    @property
    def reference(self) -> ReferenceTail:
        if self.kind == "ost":
            return ReferenceTail("student-t", k=self.n - 1)
        if self.kind in ("tst", "welch"):
            return ReferenceTail("student-t", k=self.n - 2)
        return ReferenceTail("fisher-f", k=self.n2 - 1, m=self.n1 - 1)

    @property
    def triple(self) -> tuple[int, int, int]:
        """(alpha, m, k) of the shrinking-ball reduction."""
        ref = self.reference
        return ref.alpha, ref.m, ref.k

    @property
    def ball_dim(self) -> int:
        return self.reference.k

    def to_json(self) -> dict:
        if self.kind == "ost":
            return {"test": "ost", "n": self.n}
        return {"test": self.kind, "n1": self.n1, "n2": self.n2}


def _householder_to(target: np.ndarray) -> np.ndarray:
    """Symmetric orthogonal matrix H with H e_last = target (unit vector)."""
    n = target.size
    e = np.zeros(n)
    e[-1] = 1.0
    w = e - target
    nw = w @ w
    if nw < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(w, w) / nw


@dataclass(frozen=True)
class OrthogonalFrame:
    matrix: np.ndarray
    omega0: float | None = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def build_orthogonal_frame(spec: TestSpec) -> OrthogonalFrame:
    """Orthogonal A pinning the last coordinate axis (or both block axes) to
    the normalised all-ones directions."""
    if spec.kind == "ost":
        ones = np.full(spec.n, 1.0 / math.sqrt(spec.n))
        return OrthogonalFrame(_householder_to(ones))
    n1, n2 = spec.n1, spec.n2
    A = np.zeros((spec.n, spec.n))
    A[:n1, :n1] = _householder_to(np.full(n1, 1.0 / math.sqrt(n1)))
    A[n1:, n1:] = _householder_to(np.full(n2, 1.0 / math.sqrt(n2)))
    return OrthogonalFrame(A, omega0=math.acos(math.sqrt(n2 / spec.n)))


def unit_directions(spec: TestSpec) -> tuple[np.ndarray, np.ndarray]:
    """The two block unit vectors (1/sqrt(n1),..,0,..) and (0,..,1/sqrt(n2),..)."""
    I1 = np.zeros(spec.n)
    I2 = np.zeros(spec.n)
    I1[: spec.n1] = 1.0 / math.sqrt(spec.n1)
    I2[spec.n1:] = 1.0 / math.sqrt(spec.n2)
    return I1, I2


@dataclass
class KgResult:
    value: float
    method: str
    abs_error: float = 0.0
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.value = float(self.value)
        self.abs_error = float(self.abs_error)

    def to_json(self) -> dict:
        return {"kg": self.value, "method": self.method, "abs_error": self.abs_error,
                "diagnostics": self.diagnostics}


@dataclass
class ErrorBound:
    d_value: float
    C3: float
    triple: tuple[int, int, int]
    u: float
    kg: float
    G0: float
    grad_sup_norm: float
    hess_trace: float
    L: float

    def to_json(self) -> dict:
        return {"d": self.d_value, "C3": self.C3, "triple": list(self.triple), "u": self.u,
                "kg": self.kg, "G0": self.G0, "grad_sup_norm": self.grad_sup_norm,
                "hess_trace": self.hess_trace, "L": self.L}
