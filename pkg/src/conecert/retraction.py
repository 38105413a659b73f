"""Retraction ansatz ``f = c prod <lambda_i, x>^{e_i}`` and its Jacobian.

For the retraction ``Phi(x) = f(x) Ad(k)A`` of a face-preserving ansatz the
Jacobian on the chamber factors as ``J = J1 * J2`` with

* ``J1 = |grad f|``,
* ``J2 = prod_lambda g_lambda^{m(lambda)}``, ``g_lambda = <lambda,A> f / <lambda,x>``,

the product running over roots that do not vanish at ``A``. Everything here is
kept exact: forms have rational coefficients, exponents are rational, and the
one irrational constant ``c`` is a :class:`Radical`.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy

from .errors import AnsatzError
from .orbit import BasePoint, minimal_point
from .polynomial import MonomialExpr, Poly, Radical
from .rootdata import (
    LinearForm,
    RootSystem,
    build_root_system,
    delta_label,
    face_lattice,
    format_fraction,
    parse_delta,
    parse_type,
)


def _poly_value(form: LinearForm, point) -> Fraction:
    return sum((Fraction(c) * Fraction(x) for c, x in zip(form.coeffs, point)), Fraction(0))


@dataclass(frozen=True)
class Ansatz:
    """Validated ansatz; ``f(tA) = t`` holds exactly."""

    rs: RootSystem
    delta0: frozenset[int]
    base: BasePoint
    forms: tuple[tuple[LinearForm, Fraction], ...]
    c: Radical
    source: str = "user"

    @property
    def rank(self):
        return self.rs.rank

    @property
    def direction(self) -> tuple[Fraction, ...]:
        """Rational chamber direction ``a`` with ``A = a / |a|``."""
        return self.base.exact_direction

    def monomial(self) -> MonomialExpr:
        return MonomialExpr([(L.to_poly(), e) for L, e in self.forms], self.c, self.rank)

    def log_f(self, X) -> np.ndarray:
        return self.monomial().log_eval(X)

    def __call__(self, x) -> float:
        return self.monomial()(x)

    def log_gradient_exact(self, x) -> tuple[Fraction, ...]:
        """``d log f / d x_k`` at a rational chamber point."""
        out = [Fraction(0)] * self.rank
        for L, e in self.forms:
            v = _poly_value(L, x)
            for k, ck in enumerate(L.coeffs):
                out[k] += e * ck / v
        return tuple(out)

    def chamber_gradient(self, x) -> np.ndarray:
        """Partial derivatives ``df/dx_k`` (floating point)."""
        x = np.asarray(x, dtype=float)
        g = np.zeros(self.rank)
        for L, e in self.forms:
            c = np.array([float(v) for v in L.coeffs])
            g += float(e) * c / float(c @ x)
        return self(x) * g

    def describe(self):
        names = [f"a{i + 1}" for i in range(self.rank)]
        parts = [f"<{L.label(names)},x>^({format_fraction(e)})" for L, e in self.forms]
        return f"[{self.c!r}] " + " * ".join(parts)

    def to_dict(self):
        return {
            "source": self.source,
            "factors": [
                {"coeffs": [format_fraction(c) for c in L.coeffs], "exponent": format_fraction(e)}
                for L, e in self.forms
            ],
            "c_squared": format_fraction((self.c**2).to_fraction())
            if (self.c**2).is_rational()
            else repr(self.c),
        }


def _form(coeffs) -> LinearForm:
    return coeffs if isinstance(coeffs, LinearForm) else LinearForm(tuple(Fraction(c) for c in coeffs))


def validate_ansatz(rs: RootSystem, delta0, forms, base: BasePoint | None = None, source="user") -> Ansatz:
    """Check the retraction hypotheses and normalize.

    ``forms`` is a sequence of ``(coeffs or LinearForm, exponent)``. Raises
    :class:`AnsatzError` with code ``EXPONENT_SUM``, ``NEGATIVE_FORM``,
    ``ZERO_AT_BASE``, ``FACE_LEAK`` or ``INEXACT_BASE``.
    """
    delta0 = frozenset(delta0)
    forms = tuple((_form(L), Fraction(e)) for L, e in forms)
    if not forms:
        raise AnsatzError("EMPTY_ANSATZ", "an ansatz needs at least one factor")
    for L, e in forms:
        if L.rank != rs.rank:
            raise AnsatzError("RANK_MISMATCH", f"form {L.coeffs} has rank {L.rank}, system has {rs.rank}")
        if e <= 0:
            raise AnsatzError("BAD_EXPONENT", f"exponent {e} must be positive")
        if not L.is_nonnegative() or not L.support():
            raise AnsatzError("NEGATIVE_FORM", f"form {L.coeffs} is not a nonzero nonnegative combination")
    total = sum(e for _, e in forms)
    if total != 1:
        raise AnsatzError("EXPONENT_SUM", f"exponents sum to {total}, must be 1")
    for face in face_lattice(rs):
        if delta0 <= face.delta:
            continue
        if not any(L.vanishes_on(face.delta) for L, _ in forms):
            raise AnsatzError(
                "FACE_LEAK", f"no factor vanishes on the face C^{{{delta_label(face.delta)}}}"
            )
    if base is None:
        base = minimal_point(rs, delta0)
    if base.exact_direction is None:
        raise AnsatzError("INEXACT_BASE", "base point has no exact rational direction")
    a = base.exact_direction
    p_at_a = Radical.one()
    for L, e in forms:
        v = _poly_value(L, a)
        if v <= 0:
            raise AnsatzError("ZERO_AT_BASE", f"factor {L.coeffs} vanishes at the base point")
        p_at_a = p_at_a * Radical.of(v, e)
    c = Radical.of(base.norm_squared, Fraction(1, 2)) / p_at_a
    return Ansatz(rs, delta0, base, forms, c, source)


def normalization(ans: Ansatz) -> Radical:
    return ans.c


def gradient_norm_squared(ans: Ansatz) -> MonomialExpr:
    """``|grad f|^2`` as ``c^2 Q prod L_k^{2 e_k - 2}``.

    ``Q = sum_ij e_i e_j <lambda_i, lambda_j> prod_{k!=i} L_k prod_{k!=j} L_k``
    is a polynomial, so the result is a single closed monomial expression.
    """
    rs, n = ans.rs, ans.rank
    polys = [L.to_poly() for L, _ in ans.forms]
    rest = []
    for i in range(len(polys)):
        r = Poly.constant(1, n)
        for k, p in enumerate(polys):
            if k != i:
                r = r * p
        rest.append(r)
    Q = Poly.zero(n)
    for (i, (Li, ei)), (j, (Lj, ej)) in itertools.product(enumerate(ans.forms), repeat=2):
        w = ei * ej * rs.form_inner(Li, Lj)
        if w:
            Q = Q + rest[i] * rest[j] * Poly.constant(w, n)
    factors = [(p, 2 * e - 2) for p, (_, e) in zip(polys, ans.forms)] + [(Q, 1)]
    return MonomialExpr(factors, ans.c**2, n)


def g_factor(ans: Ansatz, form: LinearForm) -> MonomialExpr:
    """``<lambda, A> f(x) / <lambda, x>``; the scale of ``A`` cancels."""
    a = ans.direction
    const = Radical.of(_poly_value(form, a))
    for L, e in ans.forms:
        const = const / Radical.of(_poly_value(L, a), e)
    factors = [(L.to_poly(), e) for L, e in ans.forms] + [(form.to_poly(), -1)]
    return MonomialExpr(factors, const, ans.rank)


@dataclass(frozen=True)
class JacobianExpr:
    """``J^2 = j1_squared * prod_c g_factors[c]^{2 m_c}``."""

    ansatz: Ansatz
    j1_squared: MonomialExpr
    g_factors: dict[str, MonomialExpr]
    root_factors: tuple = field(default=())

    @property
    def rs(self):
        return self.ansatz.rs

    @property
    def classes(self):
        return tuple(self.g_factors)

    def multiplicities(self, values=None) -> dict[str, sympy.Expr]:
        """Class multiplicities; ``values`` may be keyed by class or by symbol."""
        mult = self.rs.mult
        if values:
            subs = {sympy.Symbol(k): sympy.sympify(v) for k, v in values.items()}
            mult = {
                c: sympy.sympify(values[c]) if c in values else sympy.expand(m.subs(subs))
                for c, m in mult.items()
            }
        return {c: mult[c] for c in self.g_factors}

    def _concrete(self, mult):
        mult = self.multiplicities(mult)
        out = {}
        for c in self.g_factors:
            m = sympy.sympify(mult[c])
            if m.free_symbols:
                raise AnsatzError("SYMBOLIC_MULTIPLICITY", f"class {c} has symbolic multiplicity {m}")
            out[c] = Fraction(int(m))
        return out

    def j2(self, mult=None) -> MonomialExpr:
        m = self._concrete(mult)
        out = MonomialExpr.const(Radical.one(), self.ansatz.rank)
        for c, g in self.g_factors.items():
            out = out * g ** m[c]
        return out

    def j_squared(self, mult=None) -> MonomialExpr:
        return self.j1_squared * self.j2(mult) ** 2

    def log_value(self, X, mult=None) -> np.ndarray:
        m = self._concrete(mult)
        out = 0.5 * self.j1_squared.log_eval(X)
        for c, g in self.g_factors.items():
            if m[c]:
                out = out + float(m[c]) * g.log_eval(X)
        return out

    def value(self, x, mult=None) -> float:
        return float(np.exp(self.log_value(np.asarray(x, dtype=float)[None, :], mult)[0]))

    def exact_squared(self, x, mult=None) -> Radical:
        """``J(x)^2`` at a rational chamber point, as an exact radical."""
        return self.j_squared(mult).evaluate_exact(x)


def assemble_jacobian(ans: Ansatz) -> JacobianExpr:
    """Closed-form ``J1^2`` and per-class ``g`` products for ``ans``."""
    rs = ans.rs
    roots = rs.contributing_roots(ans.delta0)
    per_class: dict[str, MonomialExpr] = {}
    root_factors = []
    for r in roots:
        g = g_factor(ans, r.form)
        root_factors.append((r, g))
        per_class[r.cls] = per_class[r.cls] * g if r.cls in per_class else g
    ordered = {c: per_class[c] for c in rs.classes if c in per_class}
    return JacobianExpr(ans, gradient_norm_squared(ans), ordered, tuple(root_factors))


# -- ansatz files ---------------------------------------------------------------

_FACTOR_RE = re.compile(r"^coeffs\s*=\s*\[([^\]]*)\]\s*,\s*exponent\s*=\s*([-+0-9/ ]+)$")


@dataclass
class AnsatzFile:
    """Parsed contents of an ansatz file, before validation."""

    system: str
    delta: str
    factors: list[tuple[tuple[Fraction, ...], Fraction]]
    mult: dict[str, str] = field(default_factory=dict)
    threshold: int | None = None
    vary: tuple[str, ...] | None = None
    rank: int | None = None

    def build(self, multiplicities=None, source=None) -> Ansatz:
        family, rank = parse_type(self.system) if self.rank is None else (self.system, self.rank)
        rs = build_root_system(family, rank, multiplicities or self.mult or None)
        delta0 = parse_delta(self.delta, rs.rank)
        return validate_ansatz(rs, delta0, self.factors, source=source or "file")


def _parse_mult(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise AnsatzError("BAD_ANSATZ_FILE", f"multiplicity entry {part!r} is not key=value")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_ansatz_text(text: str) -> AnsatzFile:
    """Parse the declarative ansatz format.

    Header lines are ``key = value`` with keys ``system``, ``rank``, ``delta``,
    ``mult``, ``threshold`` and ``vary``; each factor line reads
    ``coeffs = [c1, ..., cl], exponent = p/q``. ``#`` starts a comment.
    """
    header: dict[str, str] = {}
    factors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _FACTOR_RE.match(line)
        if m:
            try:
                coeffs = tuple(Fraction(c.strip()) for c in m.group(1).split(",") if c.strip())
                exponent = Fraction(m.group(2).replace(" ", ""))
            except (ValueError, ZeroDivisionError) as exc:
                raise AnsatzError("BAD_ANSATZ_FILE", f"line {lineno}: {exc}") from None
            factors.append((coeffs, exponent))
            continue
        if "=" not in line:
            raise AnsatzError("BAD_ANSATZ_FILE", f"line {lineno}: cannot parse {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in {"system", "rank", "delta", "mult", "threshold", "vary"}:
            raise AnsatzError("BAD_ANSATZ_FILE", f"line {lineno}: unknown key {key!r}")
        header[key] = value
    for key in ("system", "delta"):
        if key not in header:
            raise AnsatzError("BAD_ANSATZ_FILE", f"missing header {key!r}")
    if not factors:
        raise AnsatzError("BAD_ANSATZ_FILE", "no factor lines")
    try:
        threshold = int(header["threshold"]) if "threshold" in header else None
        rank = int(header["rank"]) if "rank" in header else None
    except ValueError as exc:
        raise AnsatzError("BAD_ANSATZ_FILE", str(exc)) from None
    vary = tuple(v.strip() for v in header["vary"].split(",") if v.strip()) if "vary" in header else None
    return AnsatzFile(
        header["system"], header["delta"], factors, _parse_mult(header.get("mult", "")), threshold, vary, rank
    )


def load_ansatz_file(path) -> AnsatzFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise AnsatzError("BAD_ANSATZ_FILE", f"cannot read {path}: {exc}") from None
    return parse_ansatz_text(text)


def format_ansatz(ans: Ansatz, threshold=None, vary=None) -> str:
    """Inverse of :func:`parse_ansatz_text` for a validated ansatz."""
    lines = [f"system = {ans.rs.label}", f"delta = {delta_label(ans.delta0)}"]
    mult = ", ".join(f"{c}={sympy.sstr(m)}" for c, m in ans.rs.multiplicities)
    lines.append(f"mult = {mult}")
    if threshold is not None:
        lines.append(f"threshold = {threshold}")
    if vary:
        lines.append("vary = " + ", ".join(vary))
    for L, e in ans.forms:
        coeffs = ", ".join(format_fraction(c) for c in L.coeffs)
        lines.append(f"coeffs = [{coeffs}], exponent = {format_fraction(e)}")
    return "\n".join(lines) + "\n"


# -- heuristic search -------------------------------------------------------------

SEARCH_Q = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3))
SEARCH_EXPONENTS = (
    Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(1)
)


def candidate_forms(rs: RootSystem, delta0) -> list[LinearForm]:
    """Contributing roots together with ``alpha + q beta`` for simple roots."""
    seen, out = set(), []
    for r in rs.contributing_roots(delta0):
        if r.form.coeffs not in seen:
            seen.add(r.form.coeffs)
            out.append(r.form)
    n = rs.rank
    for i, j in itertools.permutations(range(n), 2):
        for q in SEARCH_Q:
            coeffs = tuple(Fraction(int(k == i)) + (q if k == j else 0) for k in range(n))
            if coeffs not in seen:
                seen.add(coeffs)
                out.append(LinearForm(coeffs))
    return out


def search_ansatz(rs: RootSystem, delta0, accept, max_factors=2, base=None):
    """First candidate (in a fixed order) that validates and passes ``accept``.

    ``accept`` receives a validated :class:`Ansatz` and returns a truthy value
    to stop the search. Returns ``(ansatz, tried)`` or ``(None, tried)``.
    """
    delta0 = frozenset(delta0)
    base = base or minimal_point(rs, delta0)
    forms = candidate_forms(rs, delta0)
    tried = 0
    for size in range(1, max_factors + 1):
        for combo in itertools.combinations(forms, size):
            for exps in itertools.product(SEARCH_EXPONENTS, repeat=size):
                if sum(exps) != 1:
                    continue
                try:
                    ans = validate_ansatz(rs, delta0, zip(combo, exps), base, source="search")
                except AnsatzError:
                    continue
                tried += 1
                if accept(ans):
                    return ans, tried
    return None, tried
