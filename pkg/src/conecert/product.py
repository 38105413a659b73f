"""Product construction for cones over products of two orbits.

Given retractions ``f_i`` for orbits of dimension ``k_i`` with ``J1_i J2_i <= 1``
and ``J2_i <= 1``, the map ``f = f1 f2 / (a2^3 f1 + a1^3 f2)`` with
``a_i^2 = k_i / k`` is again area-nonincreasing when ``k1, k2 >= 3``. Along the
segment ``a1^2 X1 + a2^2 X2 = 1`` the bound reduces to ``D <= 1`` with

``D = (a1^2 X1^4 + a2^2 X2^4) X1^{2 k1} X2^{2 k2} / (a1^2 X1 + a2^2 X2)^{2k+4}``,

which :func:`profile_check` verifies numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ProductError
from .numeric import Model, NumericResult, ProductModel, maximize_j
from .verdict import Verdict

MIN_DIM = 3


@dataclass
class Factor:
    """One side of a product: a numeric model plus its certification record."""

    model: Model
    k: int
    verdict: Verdict
    j2_le_1: bool
    label: str = ""
    payload: dict = field(default_factory=dict)


@dataclass
class ProductCase:
    left: Factor
    right: Factor
    model: ProductModel
    verdict: Verdict = Verdict.CERTIFIED
    j2_le_1: bool = True
    notes: list[str] = field(default_factory=list)
    numeric: NumericResult | None = None

    @property
    def k(self):
        return self.left.k + self.right.k

    @property
    def a(self):
        return math.sqrt(self.left.k / self.k), math.sqrt(self.right.k / self.k)

    @property
    def label(self):
        return f"({self.left.label}) x ({self.right.label})"

    def as_factor(self) -> Factor:
        return Factor(self.model, self.k, self.verdict, self.j2_le_1, self.label)


def compose(left: Factor, right: Factor) -> ProductCase:
    """Combine two certified factors.

    Raises ``DIM_TOO_SMALL`` if either orbit has dimension below 3 and
    ``HYPOTHESIS_MISSING`` if either input is not certified together with
    ``J2 <= 1``.
    """
    for side, fac in (("left", left), ("right", right)):
        if fac.k < MIN_DIM:
            raise ProductError(
                "DIM_TOO_SMALL",
                f"{side} orbit has dimension {fac.k}; the construction needs k >= {MIN_DIM}"
                " (small products such as S^1 x S^5 bound non-minimizing cones)",
            )
        if fac.verdict is not Verdict.CERTIFIED or not fac.j2_le_1:
            raise ProductError(
                "HYPOTHESIS_MISSING",
                f"{side} input must be CERTIFIED with J2 <= 1 established"
                f" (verdict {fac.verdict.value}, j2_le_1={fac.j2_le_1})",
            )
    case = ProductCase(left, right, ProductModel(left.model, right.model))
    case.notes.append("J <= 1 by the product theorem; J2 <= 1 holds for the product, so it composes again")
    return case


def check_numeric(case: ProductCase, grid_n=60, refine_iters=200) -> NumericResult:
    case.numeric = maximize_j(case.model, grid_n, refine_iters)
    return case.numeric


# -- profile along the segment P ------------------------------------------------------


def _weights(k1, k2):
    k = k1 + k2
    return k1 / k, k2 / k


def profile_d(X1, X2, k1, k2):
    """``D(X1, X2)``; homogeneous of degree 0."""
    w1, w2 = _weights(k1, k2)
    X1, X2 = np.asarray(X1, dtype=float), np.asarray(X2, dtype=float)
    k = k1 + k2
    with np.errstate(divide="ignore"):
        logd = (
            np.log(w1 * X1**4 + w2 * X2**4)
            + 2 * k1 * np.log(X1)
            + 2 * k2 * np.log(X2)
            - (2 * k + 4) * np.log(w1 * X1 + w2 * X2)
        )
    return np.exp(logd)


def profile_d_tilde(X1, X2, k1, k2):
    """``D~ = (a1^2 X1^4 + a2^2 X2^4) X1^{2k1} X2^{2k2}``, the numerator of ``D``."""
    w1, w2 = _weights(k1, k2)
    X1, X2 = np.asarray(X1, dtype=float), np.asarray(X2, dtype=float)
    return (w1 * X1**4 + w2 * X2**4) * X1 ** (2 * k1) * X2 ** (2 * k2)


def on_segment(X1, k1, k2):
    """``X2`` with ``a1^2 X1 + a2^2 X2 = 1``."""
    w1, w2 = _weights(k1, k2)
    return (1 - w1 * np.asarray(X1, dtype=float)) / w2


def derivative_factor(X1, X2, k1, k2):
    """Closed-form ``dD/dX1`` along the segment.

    ``-2 a1^2 X1^{2k1-1} X2^{2k2-1} (X1 - X2) B`` with
    ``B = (k1-3) X1^4 + (k2-3) X2^4 + 3 (X1-X2)^4 + 10 X1 X2 (X1-X2)^2``;
    every term of ``B`` is nonnegative once ``k1, k2 >= 3``.
    """
    w1, _ = _weights(k1, k2)
    d = X1 - X2
    poly = (k1 - 3) * X1**4 + (k2 - 3) * X2**4 + 3 * d**4 + 10 * X1 * X2 * d**2
    return -2 * w1 * X1 ** (2 * k1 - 1) * X2 ** (2 * k2 - 1) * d * poly


def profile_check(k1: int, k2: int, samples=10**6):
    """Global maximum of ``D`` on the segment and its location ``(X1, X2)``.

    The closed-form derivative is sampled densely; every sign change from
    positive to nonpositive is refined by bisection, and the best of these
    local maxima (or of the raw samples, if none) is returned.
    """
    if k1 < 1 or k2 < 1:
        raise ProductError("BAD_DIMENSION", "orbit dimensions must be positive")
    w1, _ = _weights(k1, k2)
    X1 = np.linspace(0, 1 / w1, samples + 2)[1:-1]
    dv = derivative_factor(X1, on_segment(X1, k1, k2), k1, k2)

    def deriv(x):
        return derivative_factor(x, float(on_segment(x, k1, k2)), k1, k2)

    candidates = []
    for i in np.flatnonzero((dv[:-1] > 0) & (dv[1:] <= 0)):
        a, b = float(X1[i]), float(X1[i + 1])
        for _ in range(200):
            m = 0.5 * (a + b)
            if m in (a, b):
                break
            if deriv(m) > 0:
                a = m
            else:
                b = m
        candidates.append(b if deriv(b) == 0 else 0.5 * (a + b))
    if not candidates:
        D = profile_d(X1, on_segment(X1, k1, k2), k1, k2)
        candidates.append(float(X1[int(np.argmax(D))]))
    values = [float(profile_d(x, on_segment(x, k1, k2), k1, k2)) for x in candidates]
    i = int(np.argmax(values))
    x1 = candidates[i]
    return values[i], (x1, float(on_segment(x1, k1, k2)))
