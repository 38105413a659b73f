"""Exact threshold certificates and the numeric fallback.

The multiplicity of each root class is an integer or a bare symbol. Classes
sharing a symbol ``p`` are grouped into ``G_p = prod g_c``. Given threshold
parameters ``V`` and a bound ``t``, the certificate shows

* stage (i): ``G_p <= 1`` for every symbol ``p``;
* stage (ii): ``J1 prod_{p in M} G_p prod_{p free} G_p prod_fixed g_c^k <= 1``
  for every multiset ``M`` of size ``t`` drawn from ``V``.

Symbols outside ``V`` ("free") only need to be at least 1. Together these give
``J <= 1`` whenever ``sum_{p in V} m_p >= t``: any such assignment dominates
some ``M``, and the surplus factors are at most 1 by stage (i).
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .errors import ConeCertError
from .numeric import BaseModel, NumericResult, maximize_j
from .polynomial import Certificate, MonomialExpr, Poly, Radical, clear_powers, nonneg_certificate
from .retraction import JacobianExpr
from .rootdata import delta_label, format_fraction, orbit_dimension
from .verdict import Verdict


@dataclass(frozen=True)
class ThresholdSpec:
    """Condition ``sum_{p in vary} m_p >= t`` on multiplicity parameters."""

    vary: tuple[str, ...] = ()
    t: int = 0

    def __post_init__(self):
        if self.vary and self.t < 1:
            raise ConeCertError("BAD_THRESHOLD", "threshold bound must be at least 1")
        if not self.vary and self.t:
            raise ConeCertError("BAD_THRESHOLD", "a positive bound needs at least one varying parameter")

    def label(self):
        if not self.vary:
            return "none"
        return f"{' + '.join(self.vary)} >= {self.t}"

    def satisfied_by(self, values: dict) -> bool:
        return sum(int(values.get(p, 0)) for p in self.vary) >= self.t


@dataclass(frozen=True)
class Inequality:
    """One polynomial inequality ``lhs <= rhs`` and its certificate."""

    stage: str
    label: str
    power: int
    certificate: Certificate
    difference: Poly = field(repr=False, compare=False)

    @property
    def ok(self):
        return self.certificate.ok

    def to_dict(self, dump=False):
        c = self.certificate
        out = {
            "stage": self.stage,
            "label": self.label,
            "power": self.power,
            "verdict": c.verdict.value,
            "terms": c.terms,
            "pieces": c.pieces,
            "min_coefficient": format_fraction(c.min_coefficient),
            "max_coefficient": format_fraction(c.max_coefficient),
            "digest": c.digest,
        }
        if dump:
            out["polynomial"] = self.difference.to_string()
        return out


@dataclass
class CertReport:
    """Outcome of a certification run."""

    verdict: Verdict
    jacobian: JacobianExpr | None
    threshold: ThresholdSpec | None = None
    inequalities: list[Inequality] = field(default_factory=list)
    numeric: NumericResult | None = None
    j2_le_1: bool = False
    notes: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    multiplicities: dict | None = None

    @property
    def ok(self):
        return self.verdict in (Verdict.CERTIFIED, Verdict.NUMERICALLY_SUPPORTED)

    def stage(self, name):
        return [q for q in self.inequalities if q.stage == name]


def _one(n):
    return MonomialExpr.const(Radical.one(), n)


def prove_le_one(expr: MonomialExpr, ray=None) -> tuple[int, Certificate, Poly]:
    """Certify ``expr <= 1`` on the chamber via power clearing."""
    lhs, rhs, n = clear_powers(expr, _one(expr.nvars))
    diff = rhs - lhs
    return n, nonneg_certificate(diff, ray), diff


def _group(j: JacobianExpr, mult):
    """Split classes into symbol groups and fixed integer classes."""
    groups: dict[str, list[str]] = {}
    fixed: dict[str, int] = {}
    for c in j.g_factors:
        m = sympy.sympify(mult[c])
        if m.is_Integer:
            if m < 0:
                raise ConeCertError("NONPOSITIVE_MULTIPLICITY", f"class {c} has multiplicity {m}")
            fixed[c] = int(m)
        elif m.is_Symbol:
            groups.setdefault(str(m), []).append(c)
        else:
            return None, None
    return groups, fixed


def default_threshold(j: JacobianExpr) -> ThresholdSpec:
    """All symbols vary, bound 2 (the most common pattern); none when concrete."""
    groups, _ = _group(j, j.multiplicities())
    if not groups:
        return ThresholdSpec()
    return ThresholdSpec(tuple(sorted(groups)), 2)


def certify_symbolic(j: JacobianExpr, spec: ThresholdSpec | None = None, multiplicities=None) -> CertReport:
    """Two-stage exact certificate of ``J <= 1`` under ``spec``."""
    t0 = time.perf_counter()
    mult = j.multiplicities(multiplicities)
    spec = spec if spec is not None else default_threshold(j)
    n = j.ansatz.rank
    ray = j.ansatz.direction
    report = CertReport(Verdict.INCONCLUSIVE, j, spec, multiplicities={c: str(m) for c, m in mult.items()})

    groups, fixed = _group(j, mult)
    if groups is None:
        report.notes.append("multiplicities must be integers or bare symbols for a threshold certificate")
        return report
    unknown = [p for p in spec.vary if p not in groups]
    if unknown:
        raise ConeCertError(
            "BAD_THRESHOLD",
            f"threshold parameters {unknown} are not multiplicities of contributing classes {sorted(groups)}",
        )

    def G(p):
        out = _one(n)
        for c in groups[p]:
            out = out * j.g_factors[c]
        return out

    fixed_part = _one(n)
    for c, k in fixed.items():
        fixed_part = fixed_part * j.g_factors[c] ** k
    free = [p for p in sorted(groups) if p not in spec.vary]
    base = j.j1_squared ** Fraction(1, 2) * fixed_part
    for p in free:
        base = base * G(p)

    stage1 = {}
    for p in sorted(groups):
        power, cert, diff = prove_le_one(G(p), ray)
        q = Inequality("i", f"G[{p}] <= 1", power, cert, diff)
        stage1[p] = q
        report.inequalities.append(q)
    fixed_ok = True
    if fixed:
        power, cert, diff = prove_le_one(fixed_part, ray)
        label = " * ".join(f"g[{c}]^{k}" for c, k in fixed.items()) + " <= 1"
        q = Inequality("i", label, power, cert, diff)
        fixed_ok = q.ok
        report.inequalities.append(q)

    stage2 = []
    for M in itertools.combinations_with_replacement(spec.vary, spec.t):
        expr = base
        for p in M:
            expr = expr * G(p)
        power, cert, diff = prove_le_one(expr, ray)
        label = "J1" + "".join(f" * G[{p}]" for p in list(M) + free) + (" * fixed" if fixed else "") + " <= 1"
        q = Inequality("ii", label, power, cert, diff)
        stage2.append(q)
        report.inequalities.append(q)

    required = [stage1[p] for p in groups] + stage2
    report.j2_le_1 = all(q.ok for q in stage1.values()) and fixed_ok
    report.verdict = Verdict.CERTIFIED if all(q.ok for q in required) else Verdict.INCONCLUSIVE
    report.timings["symbolic"] = time.perf_counter() - t0
    return report


def certify_numeric(j: JacobianExpr, multiplicities=None, grid_n=400, refine_iters=200) -> CertReport:
    """Grid plus gradient-ascent estimate of ``max J`` with concrete multiplicities."""
    t0 = time.perf_counter()
    model = BaseModel(j, multiplicities)
    result = maximize_j(model, grid_n, refine_iters)
    report = CertReport(result.verdict, j, None, numeric=result, multiplicities={c: str(m) for c, m in model.mult.items()})
    report.timings["numeric"] = time.perf_counter() - t0
    return report


def ray_values(j: JacobianExpr, multiplicities=None, scales=(0.5, 1.0, 2.0, 7.0)):
    """``J(tA)`` for a few ``t``; all equal 1 for a valid retraction."""
    a = np.asarray(j.ansatz.base.coords, dtype=float)
    return [j.value(s * a, multiplicities) for s in scales]


def orbit_dims(j: JacobianExpr):
    rs = j.ansatz.rs
    k, sphere = orbit_dimension(rs, j.ansatz.delta0)
    return str(k), str(sphere)


def summarize(report: CertReport) -> str:
    j = report.jacobian
    lines = []
    if j is not None:
        a = j.ansatz
        lines.append(f"system {a.rs.label}  delta0 {{{delta_label(a.delta0)}}}  ansatz {a.describe()}")
    if report.threshold is not None:
        lines.append(f"threshold {report.threshold.label()}")
    for q in report.inequalities:
        c = q.certificate
        lines.append(
            f"  stage {q.stage:<2} {q.label}: {c.verdict.value} (N={q.power}, {c.terms} terms,"
            f" {c.pieces} piece{'s' if c.pieces > 1 else ''}, min coeff {format_fraction(c.min_coefficient)})"
        )
    if report.numeric is not None:
        r = report.numeric
        point = ", ".join(f"{v:.6g}" for v in r.argmax)
        lines.append(f"numeric max J = {r.max_j:.17g} at ({point}) on grid {r.grid_n}")
    lines.append(f"verdict {report.verdict.value}")
    return "\n".join(lines)
