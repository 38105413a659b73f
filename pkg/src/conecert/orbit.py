"""Base points of minimal orbits.

The orbit through ``H`` in the face ``C^delta`` is minimal in the sphere
exactly when the mean curvature vector
``m_H = -sum m(lambda) lambda / <lambda, H>`` (sum over roots not vanishing on
the face) is parallel to ``H``. Equivalently ``H`` is the critical point of the
concave function ``sum m log<lambda, x> - (k/2)|x|^2`` on the face, which
automatically has ``|x| = 1``; Newton's method is run on its gradient in
logarithmic coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .errors import OrbitError
from .rootdata import RootSystem

TOL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class BasePoint:
    """Unit vector ``A = sum x_a H_a`` spanning a minimal orbit."""

    delta: frozenset[int]
    coords: tuple[float, ...]
    ambient: tuple[float, ...]
    residual: float
    exact_direction: tuple[Fraction, ...] | None = None
    norm_squared: Fraction | None = None
    iterations: int = 0

    @property
    def is_exact(self):
        return self.exact_direction is not None

    def pairing(self, form) -> float:
        return float(sum(float(c) * x for c, x in zip(form.coeffs, self.coords)))


def _weights(rs: RootSystem, multiplicities=None) -> dict[str, float]:
    """Concrete class weights for the solve.

    Symbolic multiplicities are accepted only when every class carries the
    same expression; the minimal point is then independent of its value.
    """
    if multiplicities is not None:
        return {c: float(multiplicities[c]) for c in rs.classes}
    mult = rs.mult
    if rs.is_concrete():
        return {c: float(m) for c, m in mult.items()}
    values = set(mult.values())
    if len(values) == 1:
        return {c: 1.0 for c in mult}
    raise OrbitError(
        "SYMBOLIC_MULTIPLICITY",
        f"minimal point of a non-isolated face needs concrete multiplicities, got {mult}",
    )


def mean_curvature(rs: RootSystem, delta, coords, multiplicities=None):
    """Mean curvature vector ``-sum m(lambda) lambda / <lambda, H>`` at ``H = sum x_a H_a``.

    Returned in ambient coordinates; exact when ``coords`` are Fractions and
    the weights are integral.
    """
    delta = frozenset(delta)
    exact = all(isinstance(x, (int, Fraction)) for x in coords)
    if exact:
        if multiplicities is None and not rs.is_concrete() and len(set(rs.mult.values())) > 1:
            raise OrbitError("SYMBOLIC_MULTIPLICITY", "concrete multiplicities needed")
        w = (
            {c: Fraction(int(multiplicities[c])) for c in rs.classes}
            if multiplicities is not None
            else {c: Fraction(int(m)) if m.is_number else Fraction(1) for c, m in rs.mult.items()}
        )
    else:
        w = _weights(rs, multiplicities)
    dim = len(rs.metric)
    out = [Fraction(0) if exact else 0.0] * dim
    for r in rs.contributing_roots(delta):
        p = r.form(coords)
        if p == 0:
            raise OrbitError("DIVIDE_BY_ZERO", f"H lies on the wall of root {r.coeffs}")
        for k in range(dim):
            if exact:
                out[k] -= w[r.cls] * r.vector[k] / p
            else:
                out[k] -= w[r.cls] * float(r.vector[k]) / p
    return tuple(out)


def tangential_part(rs: RootSystem, m_h, ambient):
    """``m_H - <m_H, H> H / <H, H>`` in ambient coordinates."""
    hh = rs.inner(ambient, ambient)
    mh = rs.inner(m_h, ambient)
    return tuple(a - mh * b / hh for a, b in zip(m_h, ambient))


def _metric_array(rs):
    return np.array([[float(c) for c in row] for row in rs.metric])


def tangential_residual(rs: RootSystem, delta, coords, multiplicities=None) -> float:
    x = [float(c) for c in coords]
    amb = np.array([float(c) for c in rs.ambient(x)])
    m = np.array(mean_curvature(rs, delta, x, multiplicities), dtype=float)
    M = _metric_array(rs)
    t = m - (m @ M @ amb) / (amb @ M @ amb) * amb
    return float(math.sqrt(max(t @ M @ t, 0.0)))


def _normalize(rs, x):
    n2 = sum(x[i] * float(rs.gram_inverse[i][j]) * x[j] for i in range(rs.rank) for j in range(rs.rank))
    return [xi / math.sqrt(n2) for xi in x]


def _recognize(rs, delta, x, multiplicities):
    """Try to identify a rational direction and confirm minimality exactly."""
    idx = sorted(delta)
    top = max(x[i] for i in idx)
    guess = [Fraction(0)] * rs.rank
    for i in idx:
        guess[i] = Fraction(x[i] / top).limit_denominator(1000)
        if guess[i] <= 0:
            return None
    try:
        m = mean_curvature(rs, delta, guess, multiplicities)
    except OrbitError:
        return None
    amb = rs.ambient(guess)
    if any(c != 0 for c in tangential_part(rs, m, amb)):
        return None
    return tuple(guess)


def _base_point(rs, delta, direction, multiplicities, iterations=0):
    if multiplicities is None and not rs.is_concrete():
        # a ray is minimal for every choice; the residual is a diagnostic only
        multiplicities = {
            c: int(m.subs({s: 1 for s in m.free_symbols})) for c, m in rs.mult.items()
        }
    n2 = rs.chamber_inner(direction, direction)
    s = 1 / math.sqrt(float(n2))
    coords = tuple(float(c) * s for c in direction)
    ambient = tuple(float(c) for c in rs.ambient(coords))
    res = tangential_residual(rs, delta, coords, multiplicities)
    return BasePoint(frozenset(delta), coords, ambient, res, tuple(direction), n2, iterations)


def minimal_point(rs: RootSystem, delta, multiplicities=None, init=None) -> BasePoint:
    """Unique ``A`` in ``S ∩ C^delta`` whose orbit is minimal.

    For ``|delta| = 1`` this is ``H_a / |H_a|``. Otherwise a damped Newton
    iteration in log-coordinates is run from ``init`` (default: the normalized
    sum of the ``H_a``); a rational direction is then recognized and checked
    exactly when possible.
    """
    delta = frozenset(delta)
    if not delta:
        raise OrbitError("BAD_DELTA", "delta must be nonempty")
    if len(delta) == 1:
        (a,) = delta
        direction = tuple(Fraction(int(i == a)) for i in range(rs.rank))
        return _base_point(rs, delta, direction, multiplicities)

    w = _weights(rs, multiplicities)
    idx = sorted(delta)
    roots = rs.contributing_roots(delta)
    C = np.array([[float(r.coeffs[i]) for i in idx] for r in roots])
    m = np.array([w[r.cls] for r in roots])
    k = float(m.sum())
    Gi = np.array([[float(rs.gram_inverse[i][j]) for j in idx] for i in idx])

    def potential(u):
        x = np.exp(u)
        L = C @ x
        if np.any(L <= 0):
            return -np.inf
        return float(m @ np.log(L) - 0.5 * k * (x @ Gi @ x))

    def newton_dir(u):
        # phi is strictly concave in x; its Newton step dx, written as du = dx / x,
        # is an ascent direction in log coordinates and keeps iterates interior
        x = np.exp(u)
        L = C @ x
        g = C.T @ (m / L) - k * (Gi @ x)
        Hx = -(C.T * (m / L**2)) @ C - k * Gi
        return np.linalg.solve(Hx, -g) / x, x * g

    if init is None:
        x0 = np.ones(len(idx))
    else:
        x0 = np.array([float(init[i]) for i in idx])
        if np.any(x0 <= 0):
            raise OrbitError("BAD_INIT", "initial point must lie in the open face")
    x0 = x0 / math.sqrt(x0 @ Gi @ x0)
    u = np.log(x0)

    def residual(u):
        full = [0.0] * rs.rank
        for j, i in enumerate(idx):
            full[i] = math.exp(u[j])
        return tangential_residual(rs, delta, _normalize(rs, full), multiplicities), full

    res, full = residual(u)
    phi = potential(u)
    it = 0
    for it in range(1, MAX_ITER + 1):
        du, F = newton_dir(u)
        if res < TOL and np.linalg.norm(F) < 1e-13 * max(1.0, k):
            break
        slope = float(F @ du)
        if not np.isfinite(slope) or slope <= 0:
            break
        if slope < 1e-10:
            # quadratic region: phi no longer resolves progress in floating point
            u = u + du
            phi = potential(u)
            res, full = residual(u)
            continue
        t = 1.0
        while t > 1e-12:
            cand = u + t * du
            pc = potential(cand)
            if np.isfinite(pc) and pc >= phi + 1e-4 * t * slope:
                break
            t /= 2
        else:
            break
        u, phi = cand, pc
        res, full = residual(u)
    else:
        raise OrbitError("NO_CONVERGENCE", f"residual {res:.3e} after {MAX_ITER} iterations at {full}")
    F = newton_dir(u)[1]
    res, full = residual(u)
    if res >= TOL * 10 and np.linalg.norm(F) > 1e-10:
        raise OrbitError("NO_CONVERGENCE", f"residual stagnated at {res:.3e}, last iterate {full}")

    direction = _recognize(rs, delta, full, multiplicities)
    if direction is not None:
        return _base_point(rs, delta, direction, multiplicities, it)
    coords = tuple(_normalize(rs, full))
    ambient = tuple(float(c) for c in rs.ambient(coords))
    return BasePoint(delta, coords, ambient, tangential_residual(rs, delta, coords, multiplicities), None, None, it)


def describe_ambient(rs: RootSystem, point: BasePoint) -> str:
    """Closed form such as ``(e1 - e4)/sqrt(2)`` for exact base points."""
    if not point.is_exact:
        return "(" + ", ".join(f"{c:.17g}" for c in point.ambient) + ")"
    amb = rs.ambient(point.exact_direction)
    dens = [c.denominator for c in amb]
    lcm = 1
    for d in dens:
        lcm = lcm * d // math.gcd(lcm, d)
    ints = [int(c * lcm) for c in amb]
    g = 0
    for c in ints:
        g = math.gcd(g, abs(c))
    ints = [c // g for c in ints]
    n2 = rs.inner(tuple(Fraction(c) for c in ints), tuple(Fraction(c) for c in ints))
    basis = "a" if rs.family == "G" else "e"
    terms = []
    for i, c in enumerate(ints):
        if not c:
            continue
        body = f"{basis}{i + 1}" if abs(c) == 1 else f"{abs(c)}{basis}{i + 1}"
        terms.append((" - " if c < 0 else " + ") + body)
    vec = "".join(terms)
    vec = vec[3:] if vec.startswith(" + ") else "-" + vec[3:]
    root = sympy.sqrt(sympy.Rational(n2.numerator, n2.denominator))
    if root == 1:
        return vec if len(terms) == 1 else f"({vec})"
    return f"({vec})/{sympy.sstr(root)}"
