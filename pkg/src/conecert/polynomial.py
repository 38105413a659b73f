"""Exact multivariate polynomials, radical constants and monomial expressions.

Everything here works over :class:`fractions.Fraction`. Floating point only
appears in the ``log_eval`` helpers used by the numeric fallback.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np
import sympy

from .errors import AlgebraError
from .verdict import Verdict

#: Abort multiplication results larger than this many terms.
TERM_LIMIT = 10**7

Exponent = tuple[int, ...]


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    return Fraction(value)


class Poly:
    """Sparse polynomial in ``nvars`` variables with rational coefficients.

    Terms are stored as ``{exponent tuple: Fraction}`` with zero coefficients
    dropped. Instances are treated as immutable.
    """

    __slots__ = ("nvars", "terms", "_key")

    def __init__(self, terms=None, nvars=None):
        terms = terms or {}
        if nvars is None:
            if not terms:
                raise ValueError("nvars required for an empty polynomial")
            nvars = len(next(iter(terms)))
        self.nvars = nvars
        clean = {}
        for exp, c in terms.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars or min(exp, default=0) < 0:
                raise ValueError(f"bad exponent {exp} for {nvars} variables")
            c = _frac(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
        self.terms = {e: c for e, c in clean.items() if c}
        self._key = None

    @classmethod
    def _raw(cls, terms, nvars):
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._key = None
        return p

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, nvars):
        return cls._raw({}, nvars)

    @classmethod
    def constant(cls, value, nvars):
        value = _frac(value)
        return cls._raw({(0,) * nvars: value} if value else {}, nvars)

    @classmethod
    def variable(cls, index, nvars):
        exp = [0] * nvars
        exp[index] = 1
        return cls._raw({tuple(exp): Fraction(1)}, nvars)

    @classmethod
    def linear(cls, coeffs):
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            c = _frac(c)
            if c:
                exp = [0] * n
                exp[i] = 1
                terms[tuple(exp)] = c
        return cls._raw(terms, n)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly._raw(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({e: -c for e, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _frac(other)
            if not c:
                return Poly.zero(self.nvars)
            return Poly._raw({e: v * c for e, v in self.terms.items()}, self.nvars)
        other = self._coerce(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[Exponent, Fraction] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = get(e, 0) + ca * cb
            if len(out) > TERM_LIMIT:
                raise AlgebraError("TOO_MANY_TERMS", f"product exceeds {TERM_LIMIT} terms")
        return Poly._raw({e: c for e, c in out.items() if c}, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("power must be a nonnegative integer")
        result = Poly.constant(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(other, self.nvars)
        return NotImplemented

    def __hash__(self):
        return hash(self.sort_key())

    def sort_key(self):
        if self._key is None:
            self._key = tuple(sorted(self.terms.items()))
        return self._key

    # -- queries ------------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def coefficients(self):
        return list(self.terms.values())

    def content(self) -> Fraction:
        """Positive rational ``c`` such that ``self / c`` has coprime integer coefficients."""
        if not self.terms:
            return Fraction(1)
        nums = [abs(c.numerator) for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        g = reduce(math.gcd, nums)
        lcm = reduce(lambda x, y: x * y // math.gcd(x, y), dens)
        return Fraction(g, lcm)

    def primitive(self):
        c = self.content()
        return c, self * (1 / c)

    def evaluate(self, point):
        total = 0
        for e, c in self.terms.items():
            term = c
            for xi, k in zip(point, e):
                if k:
                    term = term * xi**k
            total = total + term
        return total

    def evaluate_array(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at each row of ``X`` in floating point."""
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[0])
        for e, c in self.terms.items():
            term = np.full(X.shape[0], float(c))
            for j, k in enumerate(e):
                if k:
                    term = term * X[:, j] ** k
            out += term
        return out

    def substitute_linear(self, images) -> "Poly":
        """Compose with a linear change of variables ``x_j -> images[j]``.

        ``images`` is a sequence of ``nvars`` polynomials, all in the same
        (possibly different) number of variables.
        """
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        m = images[0].nvars
        powers = [[Poly.constant(1, m)] for _ in images]

        def power(j, k):
            cache = powers[j]
            while len(cache) <= k:
                cache.append(cache[-1] * images[j])
            return cache[k]

        out = Poly.zero(m)
        for e, c in self.terms.items():
            term = Poly.constant(c, m)
            for j, k in enumerate(e):
                if k:
                    term = term * power(j, k)
            out = out + term
        return out

    # -- display ------------------------------------------------------------
    def sorted_terms(self):
        """Terms in descending lexicographic exponent order."""
        return sorted(self.terms.items(), key=lambda t: t[0], reverse=True)

    def to_string(self, names=None):
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k
            )
            coeff = str(abs(c))
            if mono:
                body = mono if abs(c) == 1 else f"{coeff}*{mono}"
            else:
                body = coeff
            parts.append(("- " if c < 0 else "+ ") + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[1:]

    def __repr__(self):
        return f"Poly({self.to_string()})"

    def digest(self) -> str:
        payload = ";".join(f"{e}:{c}" for e, c in self.sorted_terms())
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def poly_arith(p: Poly, q, op: str) -> Poly:
    """Apply ``op`` in {add, sub, mul, pow}; for ``pow`` ``q`` is the integer exponent."""
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    if op == "pow":
        return p**q
    raise ValueError(f"unknown op {op!r}")


class Radical:
    """Positive real ``prod p**e`` over primes ``p`` with rational exponents ``e``.

    Canonical by construction, so equality is exact.
    """

    __slots__ = ("powers",)

    def __init__(self, powers=()):
        merged: dict[int, Fraction] = {}
        for p, e in powers:
            merged[p] = merged.get(p, Fraction(0)) + Fraction(e)
        self.powers = tuple(sorted((p, e) for p, e in merged.items() if e))

    @classmethod
    def one(cls):
        return cls()

    @classmethod
    def of(cls, value, exponent=1):
        value = _frac(value)
        if value <= 0:
            raise AlgebraError("NONPOSITIVE_BASE", f"radical of {value}")
        exponent = _frac(exponent)
        powers = []
        for n, sign in ((value.numerator, 1), (value.denominator, -1)):
            for p, k in sympy.factorint(n).items():
                powers.append((int(p), sign * k * exponent))
        return cls(powers)

    def __mul__(self, other):
        return Radical(self.powers + other.powers)

    def __truediv__(self, other):
        return self * other ** -1

    def __pow__(self, k):
        k = _frac(k)
        return Radical([(p, e * k) for p, e in self.powers])

    def __eq__(self, other):
        return isinstance(other, Radical) and self.powers == other.powers

    def __hash__(self):
        return hash(self.powers)

    def is_one(self):
        return not self.powers

    def is_rational(self):
        return all(e.denominator == 1 for _, e in self.powers)

    def denominators(self):
        return [e.denominator for _, e in self.powers]

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise AlgebraError("IRRATIONAL", f"{self} is not rational")
        out = Fraction(1)
        for p, e in self.powers:
            out *= Fraction(p) ** int(e)
        return out

    def log(self) -> float:
        return sum(float(e) * math.log(p) for p, e in self.powers)

    def __float__(self):
        return math.exp(self.log())

    def __repr__(self):
        if not self.powers:
            return "1"
        return "*".join(f"{p}^({e})" for p, e in self.powers)


class MonomialExpr:
    """``constant * prod base_i**e_i`` with polynomial bases and rational exponents.

    Bases are stored primitive (coprime integer coefficients); their content is
    folded into the radical constant, and equal bases are merged.
    """

    __slots__ = ("constant", "factors", "nvars")

    def __init__(self, factors=(), constant=None, nvars=None):
        constant = constant if constant is not None else Radical.one()
        merged: dict[Poly, Fraction] = {}
        for base, exp in factors:
            exp = _frac(exp)
            if nvars is None:
                nvars = base.nvars
            if not exp:
                continue
            if base.is_constant():
                constant = constant * Radical.of(base.constant_value(), exp)
                continue
            content, prim = base.primitive()
            constant = constant * Radical.of(content, exp)
            merged[prim] = merged.get(prim, Fraction(0)) + exp
        self.constant = constant
        self.nvars = nvars
        self.factors = tuple(
            sorted(((b, e) for b, e in merged.items() if e), key=lambda t: t[0].sort_key())
        )

    @classmethod
    def const(cls, radical, nvars):
        return cls((), radical, nvars)

    def __mul__(self, other):
        if isinstance(other, Radical):
            return MonomialExpr(self.factors, self.constant * other, self.nvars)
        return MonomialExpr(self.factors + other.factors, self.constant * other.constant, self.nvars)

    def __truediv__(self, other):
        return self * other**-1

    def __pow__(self, k):
        k = _frac(k)
        return MonomialExpr([(b, e * k) for b, e in self.factors], self.constant**k, self.nvars)

    def __eq__(self, other):
        return (
            isinstance(other, MonomialExpr)
            and self.constant == other.constant
            and self.factors == other.factors
        )

    def __hash__(self):
        return hash((self.constant, self.factors))

    def degree(self) -> Fraction:
        return sum((e * b.degree() for b, e in self.factors), Fraction(0))

    def exponent_denominators(self):
        return [e.denominator for _, e in self.factors] + self.constant.denominators()

    def evaluate_exact(self, point) -> Radical:
        """Exact value at a rational point where every base is positive."""
        value = self.constant
        for b, e in self.factors:
            value = value * Radical.of(b.evaluate([_frac(x) for x in point]), e)
        return value

    def log_eval(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(X.shape[0], float(self.constant.log()))
        with np.errstate(divide="ignore", invalid="ignore"):
            for b, e in self.factors:
                out += float(e) * np.log(b.evaluate_array(X))
        return out

    def __call__(self, x) -> float:
        return float(np.exp(self.log_eval(np.asarray(x, dtype=float)[None, :])[0]))

    def to_string(self, names=None):
        parts = [] if self.constant.is_one() else [f"[{self.constant!r}]"]
        for b, e in self.factors:
            parts.append(f"({b.to_string(names)})^({e})")
        return " * ".join(parts) or "1"

    def __repr__(self):
        return f"MonomialExpr({self.to_string()})"


def _lcm(values):
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def clear_powers(lhs: MonomialExpr, rhs: MonomialExpr):
    """Turn ``lhs <= rhs`` into an equivalent polynomial inequality.

    Both sides are raised to ``N`` (the lcm of all exponent denominators) and
    negative powers are cross-multiplied. Requires every base to be positive on
    the region of interest. Returns ``(P_lhs, P_rhs, N)``.
    """
    if lhs.degree() != rhs.degree():
        raise AlgebraError(
            "DEGREE_MISMATCH",
            f"sides have degrees {lhs.degree()} and {rhs.degree()}; inequality is not scale invariant",
        )
    nvars = lhs.nvars if lhs.nvars is not None else rhs.nvars
    n = _lcm(lhs.exponent_denominators() + rhs.exponent_denominators())

    sides = [
        Poly.constant((lhs.constant**n).to_fraction(), nvars),
        Poly.constant((rhs.constant**n).to_fraction(), nvars),
    ]
    for own, expr in enumerate((lhs, rhs)):
        for base, e in expr.factors:
            k = int(e * n)
            if k > 0:
                sides[own] = sides[own] * base**k
            else:
                sides[1 - own] = sides[1 - own] * base**-k
    return sides[0], sides[1], n


@dataclass(frozen=True)
class Certificate:
    """Outcome of a coefficient-sign test, possibly over a stellar subdivision."""

    verdict: Verdict
    terms: int
    pieces: int
    min_coefficient: Fraction
    max_coefficient: Fraction
    digest: str

    @property
    def ok(self):
        return self.verdict is Verdict.CERTIFIED


def _stellar_pieces(p: Poly, ray):
    """Pull ``p`` back to each cone of the stellar subdivision of the orthant at ``ray``."""
    n = p.nvars
    ray = [_frac(r) for r in ray]
    for i, ri in enumerate(ray):
        if ri <= 0:
            continue
        images = []
        for j in range(n):
            img = Poly.linear([ray[j] if k == i else 0 for k in range(n)])
            if j != i:
                img = img + Poly.variable(j, n)
            images.append(img)
        yield p.substitute_linear(images)


def nonneg_certificate(p: Poly, ray=None) -> Certificate:
    """Certify ``p >= 0`` on the closed nonnegative orthant.

    CERTIFIED when every coefficient is nonnegative. If that fails and ``ray``
    (a nonnegative direction, typically where ``p`` vanishes) is not a
    coordinate axis, the orthant is split into the simplicial cones spanned by
    ``ray`` and all but one coordinate axis, and each pulled-back polynomial
    is tested the same way. INCONCLUSIVE is not a disproof.
    """
    coeffs = p.coefficients() or [Fraction(0)]
    lo, hi = min(coeffs), max(coeffs)
    if lo >= 0:
        return Certificate(Verdict.CERTIFIED, len(p), 1, lo, hi, p.digest())
    if ray is not None and sum(1 for r in ray if r) > 1:
        pieces = list(_stellar_pieces(p, ray))
        piece_min = min(min(q.coefficients() or [Fraction(0)]) for q in pieces)
        piece_max = max(max(q.coefficients() or [Fraction(0)]) for q in pieces)
        if piece_min >= 0:
            return Certificate(
                Verdict.CERTIFIED, len(p), len(pieces), piece_min, piece_max, p.digest()
            )
    return Certificate(Verdict.INCONCLUSIVE, len(p), 1, lo, hi, p.digest())
