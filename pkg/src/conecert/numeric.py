"""Floating-point evaluation and global search of ``J`` on the chamber.

Models expose ``log f``, ``log |grad f|^2`` and ``log J2`` on batches of chamber
points. :class:`BaseModel` wraps an assembled Jacobian with concrete
multiplicities; :class:`ProductModel` implements the product retraction
``f = f1 f2 / (a2^3 f1 + a1^3 f2)`` recursively, so iterated products need no
extra code.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import mpmath
import numpy as np

from .errors import EvalDomainError
from .polynomial import MonomialExpr
from .verdict import Verdict

BARRIER = 1e-6
TOL = 1e-9
TOP_STARTS = 32
CHUNK = 200_000
MP_DIGITS = 50


def thread_count() -> int:
    try:
        n = int(os.environ.get("CONE_CERT_THREADS", "0"))
    except ValueError:
        n = 0
    return max(1, n) if n else max(1, min(8, os.cpu_count() or 1))


def _mp_log_monomial(expr: MonomialExpr, point) -> mpmath.mpf:
    """``log expr(point)`` in extended precision at a rational point."""
    out = mpmath.mpf(0)
    for p, e in expr.constant.powers:
        out += mpmath.mpf(e.numerator) / e.denominator * mpmath.log(p)
    for b, e in expr.factors:
        v = b.evaluate(point)
        if v <= 0:
            return mpmath.mpf("-inf") if e > 0 else mpmath.mpf("inf")
        out += mpmath.mpf(e.numerator) / e.denominator * (
            mpmath.log(v.numerator) - mpmath.log(v.denominator)
        )
    return out


class Model:
    """Interface for numeric retraction models."""

    nvars: int
    k: int

    def log_f(self, X):  # pragma: no cover - interface
        raise NotImplementedError

    def log_grad2(self, X):  # pragma: no cover
        raise NotImplementedError

    def log_j2(self, X):  # pragma: no cover
        raise NotImplementedError

    def base_direction(self) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def log_j(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return 0.5 * self.log_grad2(X) + self.log_j2(X)

    def j(self, x) -> float:
        return float(np.exp(self.log_j(np.asarray(x, dtype=float)[None, :])[0]))

    # extended precision, single rational point
    def mp_log_f(self, x):  # pragma: no cover
        raise NotImplementedError

    def mp_log_grad2(self, x):  # pragma: no cover
        raise NotImplementedError

    def mp_log_j2(self, x):  # pragma: no cover
        raise NotImplementedError

    def mp_j(self, x) -> mpmath.mpf:
        point = [Fraction(v) for v in x]
        with mpmath.workdps(MP_DIGITS):
            return mpmath.exp(self.mp_log_grad2(point) / 2 + self.mp_log_j2(point))


class BaseModel(Model):
    """Numeric view of a :class:`~conecert.retraction.JacobianExpr`."""

    def __init__(self, jac, multiplicities=None):
        self.jac = jac
        self.mult = {c: int(v) for c, v in jac._concrete(multiplicities).items()}
        self.nvars = jac.ansatz.rank
        self.k = sum(
            self.mult[r.cls] for r, _ in jac.root_factors
        )
        self._f = jac.ansatz.monomial()
        self._terms = [(g, m) for c, g in jac.g_factors.items() if (m := self.mult[c])]

    def log_f(self, X):
        return self._f.log_eval(X)

    def log_grad2(self, X):
        return self.jac.j1_squared.log_eval(X)

    def log_j2(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros(X.shape[0])
        for g, m in self._terms:
            out += m * g.log_eval(X)
        return out

    def base_direction(self):
        a = np.array(self.jac.ansatz.base.coords, dtype=float)
        return a

    def mp_log_f(self, x):
        return _mp_log_monomial(self._f, x)

    def mp_log_grad2(self, x):
        return _mp_log_monomial(self.jac.j1_squared, x)

    def mp_log_j2(self, x):
        return sum((m * _mp_log_monomial(g, x) for g, m in self._terms), mpmath.mpf(0))


class ProductModel(Model):
    """Product retraction of two models with weights ``a_i^2 = k_i / k``."""

    def __init__(self, left: Model, right: Model):
        self.left, self.right = left, right
        self.k = left.k + right.k
        self.nvars = left.nvars + right.nvars
        self.a1 = math.sqrt(left.k / self.k)
        self.a2 = math.sqrt(right.k / self.k)
        self._mp_a = (
            mpmath.sqrt(mpmath.mpf(left.k) / self.k),
            mpmath.sqrt(mpmath.mpf(right.k) / self.k),
        )

    def _split(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X[:, : self.left.nvars], X[:, self.left.nvars :]

    def _parts(self, X):
        X1, X2 = self._split(X)
        l1, l2 = self.left.log_f(X1), self.right.log_f(X2)
        # log(a2^3 f1 + a1^3 f2)
        lden = np.logaddexp(3 * math.log(self.a2) + l1, 3 * math.log(self.a1) + l2)
        return X1, X2, l1, l2, lden

    def log_f(self, X):
        _, _, l1, l2, lden = self._parts(X)
        return l1 + l2 - lden

    def log_grad2(self, X):
        X1, X2, l1, l2, lden = self._parts(X)
        t1 = 6 * math.log(self.a1) + 4 * l2 + self.left.log_grad2(X1)
        t2 = 6 * math.log(self.a2) + 4 * l1 + self.right.log_grad2(X2)
        return np.logaddexp(t1, t2) - 4 * lden

    def log_j2(self, X):
        X1, X2, l1, l2, lden = self._parts(X)
        lf = l1 + l2 - lden
        out = self.left.k * (math.log(self.a1) + lf - l1) + self.left.log_j2(X1)
        out += self.right.k * (math.log(self.a2) + lf - l2) + self.right.log_j2(X2)
        return out

    def base_direction(self):
        return np.concatenate([self.a1 * self.left.base_direction(), self.a2 * self.right.base_direction()])

    def _mp_parts(self, x):
        n1 = self.left.nvars
        x1, x2 = x[:n1], x[n1:]
        a1, a2 = self._mp_a
        l1, l2 = self.left.mp_log_f(x1), self.right.mp_log_f(x2)
        lden = mpmath.log(a2**3 * mpmath.exp(l1) + a1**3 * mpmath.exp(l2))
        return x1, x2, l1, l2, lden

    def mp_log_f(self, x):
        _, _, l1, l2, lden = self._mp_parts(x)
        return l1 + l2 - lden

    def mp_log_grad2(self, x):
        x1, x2, l1, l2, lden = self._mp_parts(x)
        a1, a2 = self._mp_a
        t1 = a1**6 * mpmath.exp(4 * l2 + self.left.mp_log_grad2(x1))
        t2 = a2**6 * mpmath.exp(4 * l1 + self.right.mp_log_grad2(x2))
        return mpmath.log(t1 + t2) - 4 * lden

    def mp_log_j2(self, x):
        x1, x2, l1, l2, lden = self._mp_parts(x)
        a1, a2 = self._mp_a
        lf = l1 + l2 - lden
        out = self.left.k * (mpmath.log(a1) + lf - l1) + self.left.mp_log_j2(x1)
        out += self.right.k * (mpmath.log(a2) + lf - l2) + self.right.mp_log_j2(x2)
        return out


# -- search ------------------------------------------------------------------------


def simplex_grid_size(n: int, dim: int) -> int:
    return comb(n + dim - 1, dim - 1)


def _compositions(n: int, dim: int):
    """All nonnegative integer vectors of length ``dim`` summing to ``n`` (as an array)."""
    if dim == 1:
        return np.array([[n]], dtype=np.int32)
    blocks = []
    for first in range(n, -1, -1):
        rest = _compositions(n - first, dim - 1)
        blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int32), rest]))
    return np.vstack(blocks)


def _grid_chunks(n: int, dim: int):
    """Simplex lattice ``{i/n}`` in chunks, split on the leading coordinates."""
    if dim <= 2 or simplex_grid_size(n, dim) <= CHUNK:
        yield _compositions(n, dim)
        return
    for first in range(n, -1, -1):
        for rest in _grid_chunks(n - first, dim - 1):
            yield np.column_stack([np.full(len(rest), first, dtype=np.int32), rest])


def _to_slice(P, barrier):
    X = np.maximum(P, barrier)
    return X / X.sum(axis=1, keepdims=True)


def _safe_log_j(model, X):
    v = model.log_j(X)
    if np.any(np.isnan(v)) or np.any(np.isposinf(v)):
        raise EvalDomainError("EVAL_DOMAIN", "log J is undefined at a grid point")
    return v


def _ascent(model, x0, barrier, iters):
    """Projected gradient ascent of ``log J`` on the barrier-clipped simplex."""
    x = x0.copy()
    dim = len(x)
    fx = float(_safe_log_j(model, x[None, :])[0])
    step = 1e-2
    h = 1e-7
    for _ in range(iters):
        E = np.eye(dim) * h
        P = np.vstack([x + E, x - E])
        P = np.maximum(P, barrier * 0.5)
        vals = model.log_j(P)
        g = (vals[:dim] - vals[dim:]) / (2 * h)
        g = g - g.mean()
        gn = np.linalg.norm(g)
        if not np.isfinite(gn) or gn < 1e-14:
            break
        improved = False
        t = step
        while t > 1e-14:
            y = np.maximum(x + t * g / gn, barrier)
            y = y / y.sum()
            fy = float(model.log_j(y[None, :])[0])
            if np.isfinite(fy) and fy > fx:
                x, fx, improved = y, fy, True
                step = min(t * 2, 0.1)
                break
            t /= 2
        if not improved:
            break
    return x, fx


@dataclass(frozen=True)
class NumericResult:
    verdict: Verdict
    max_j: float
    argmax: tuple[float, ...]
    grid_n: int
    evaluations: int
    barrier: float
    confirmed_mp: str | None = None

    def to_dict(self):
        out = {
            "verdict": self.verdict.value,
            "max_j": self.max_j,
            "argmax": list(self.argmax),
            "grid_n": self.grid_n,
            "evaluations": self.evaluations,
            "barrier": self.barrier,
        }
        if self.confirmed_mp is not None:
            out["max_j_extended"] = self.confirmed_mp
        return out


def maximize_j(model: Model, grid_n=400, refine_iters=200, barrier=BARRIER, top=TOP_STARTS, scale=1.0):
    """Maximize ``J`` over ``{sum x = scale, x >= barrier*scale}``.

    Returns a :class:`NumericResult`. Raises :class:`EvalDomainError` only if
    the retry with a smaller barrier also fails.
    """
    try:
        return _maximize(model, grid_n, refine_iters, barrier, top, scale)
    except EvalDomainError:
        return _maximize(model, grid_n, refine_iters, barrier / 100, top, scale)


def _maximize(model, grid_n, refine_iters, barrier, top, scale):
    dim = model.nvars
    best_vals = np.empty(0)
    best_pts = np.empty((0, dim))
    count = 0

    def work(chunk):
        X = _to_slice(chunk.astype(float) / grid_n, barrier)
        return X, _safe_log_j(model, X * scale)

    with ThreadPoolExecutor(thread_count()) as pool:
        for X, v in pool.map(work, _grid_chunks(grid_n, dim)):
            count += len(v)
            keep = np.argsort(-v, kind="stable")[:top]
            best_vals = np.concatenate([best_vals, v[keep]])
            best_pts = np.vstack([best_pts, X[keep]])
            order = np.argsort(-best_vals, kind="stable")[:top]
            best_vals, best_pts = best_vals[order], best_pts[order]

    starts = list(best_pts)
    a = np.asarray(model.base_direction(), dtype=float)
    if np.all(a >= 0) and a.sum() > 0:
        starts.append(_to_slice((a / a.sum())[None, :], barrier)[0])
    best_x, best_f = None, -np.inf
    for x0 in starts:
        x, fx = _ascent(_Scaled(model, scale), x0, barrier, refine_iters)
        count += 1
        if fx > best_f:
            best_x, best_f = x, fx
    max_j = float(math.exp(best_f))
    point = best_x * scale
    confirmed = None
    if abs(max_j - 1) < 1e-6:
        mp_value = model.mp_j([Fraction(float(v)) for v in point])
        confirmed = mpmath.nstr(mp_value, 20)
        exceeds = mp_value > 1 + mpmath.mpf(TOL)
    else:
        exceeds = max_j > 1 + TOL
    verdict = Verdict.FAILED if exceeds else Verdict.NUMERICALLY_SUPPORTED
    return NumericResult(verdict, max_j, tuple(float(v) for v in point), grid_n, count, barrier, confirmed)


class _Scaled(Model):
    """Evaluate ``model`` on ``scale * X`` (used for the scale-invariance check)."""

    def __init__(self, model, scale):
        self.model, self.scale, self.nvars = model, scale, model.nvars

    def log_j(self, X):
        return self.model.log_j(np.atleast_2d(X) * self.scale)
