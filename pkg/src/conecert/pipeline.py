"""End-to-end runs: root data, base point, ansatz, Jacobian, certificate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import sympy

from .catalog import Alias, aliases, find_builtin, parse_dims, parse_mult, table_rows
from .certify import CertReport, ThresholdSpec, certify_numeric, certify_symbolic
from .errors import ConeCertError
from .retraction import (
    AnsatzFile,
    assemble_jacobian,
    load_ansatz_file,
    search_ansatz,
    validate_ansatz,
)
from .rootdata import build_root_system, delta_label, orbit_dimension, parse_delta, parse_type
from .verdict import Verdict

MODES = ("symbolic", "numeric", "both")


@dataclass
class Run:
    """A certification run together with the context needed to report it."""

    report: CertReport
    type_label: str
    delta: str
    data_type: str
    data_delta: str
    multiplicities: dict[str, str]
    orbit_dim: str
    sphere_dim: str
    mode: str
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        return self.report.verdict

    @property
    def k(self) -> int | None:
        try:
            return int(sympy.Integer(sympy.sympify(self.orbit_dim)))
        except (TypeError, ValueError):
            return None


def _type_label(type_label, rank):
    if type_label is None:
        raise ConeCertError("USAGE", "a root system type is required (--type or an ansatz file)")
    if rank is not None and not any(ch.isdigit() for ch in type_label):
        type_label = f"{type_label}{rank}"
    family, r = parse_type(type_label)
    if rank is not None and r != rank:
        raise ConeCertError("USAGE", f"--rank {rank} contradicts type {type_label}")
    return f"{family}{r}"


def _alias_for(type_label) -> Alias | None:
    return aliases().get(type_label)


def _default_vary(rs, builtin_vary):
    names = {str(s) for s in rs.symbols}
    vary = tuple(v for v in builtin_vary if v in names)
    return vary or tuple(sorted(names))


def _numeric_assignment(rs, spec: ThresholdSpec):
    """Smallest balanced concrete assignment satisfying ``spec``."""
    values = {}
    share = math.ceil(spec.t / len(spec.vary)) if spec.vary else 0
    for s in rs.symbols:
        values[str(s)] = share if str(s) in spec.vary else 1
    return values


def run_certify(
    type_label=None,
    rank=None,
    mult=None,
    delta=None,
    threshold=None,
    vary=None,
    ansatz_path=None,
    mode="symbolic",
    grid=400,
    search=False,
    refine_iters=200,
) -> Run:
    """Full pipeline for one orbit; see the ``certify`` subcommand."""
    if mode not in MODES:
        raise ConeCertError("USAGE", f"mode must be one of {MODES}")
    notes = []
    spec_file: AnsatzFile | None = None
    if ansatz_path is not None:
        spec_file = load_ansatz_file(ansatz_path)
        file_type = _type_label(spec_file.system, spec_file.rank)
        if type_label is not None and _type_label(type_label, rank) != file_type:
            raise ConeCertError("USAGE", f"--type {type_label} contradicts ansatz file system {file_type}")
        type_label = file_type
        delta = delta or spec_file.delta
        mult = mult if mult is not None else (spec_file.mult or None)
        threshold = threshold if threshold is not None else spec_file.threshold
        vary = vary if vary is not None else spec_file.vary
    type_label = _type_label(type_label, rank)
    if isinstance(mult, str):
        mult = parse_mult(mult, type_label)
    if delta is None:
        raise ConeCertError("USAGE", "delta0 is required (--delta)")
    family, r = parse_type(type_label)
    delta_text = delta_label(parse_delta(delta, r))

    # dimensions in the requested type's own labeling
    native = build_root_system(family, r, mult)
    orbit_dim, sphere_dim = (str(v) for v in orbit_dimension(native, parse_delta(delta_text, r)))

    alias = _alias_for(type_label)
    data_type, data_delta, data_mult, data_vary = type_label, delta_text, mult, vary
    if alias is not None and spec_file is None:
        data_type = alias.target
        data_delta = alias.translate_delta(delta_text, r)
        data_mult = alias.translate_mult(mult)
        data_vary = alias.translate_names(vary) if vary else vary
        notes.append(
            f"{type_label} is served by the {data_type} data path with multiplicity keys"
            f" {alias.mult} and faces {alias.delta} relabeled"
        )
    dfam, drank = parse_type(data_type)

    builtin = None if spec_file is not None else find_builtin(data_type, data_delta)
    base_mult = data_mult if data_mult is not None else (builtin.mult if builtin and builtin.mult else None)
    rs = build_root_system(dfam, drank, base_mult)
    delta0 = parse_delta(data_delta, drank)

    # threshold
    if rs.is_concrete():
        spec = ThresholdSpec()
        if threshold is not None or vary:
            notes.append("multiplicities are concrete; the threshold is not used")
    else:
        names = data_vary or _default_vary(rs, builtin.vary if builtin else ())
        t = threshold if threshold is not None else (builtin.t if builtin and builtin.t else 2)
        spec = ThresholdSpec(tuple(names), int(t))

    if spec_file is not None:
        ans = validate_ansatz(rs, delta0, spec_file.factors, source=f"file:{ansatz_path}")
    elif builtin is not None:
        ans = validate_ansatz(rs, delta0, builtin.factors, source=f"builtin:{builtin.key}")
    elif search:
        def accept(candidate):
            return certify_symbolic(assemble_jacobian(candidate), spec).verdict is Verdict.CERTIFIED

        ans, tried = search_ansatz(rs, delta0, accept)
        if ans is None:
            raise ConeCertError("NO_ANSATZ", f"search exhausted {tried} candidates without a certificate")
        notes.append(f"ansatz found by search after {tried} validated candidates")
    else:
        raise ConeCertError(
            "NO_ANSATZ", f"no built-in ansatz for {data_type} delta0={{{data_delta}}}; use --ansatz or --search"
        )
    jac = assemble_jacobian(ans)

    report = None
    if mode in ("symbolic", "both"):
        report = certify_symbolic(jac, spec)
    if mode in ("numeric", "both"):
        if rs.is_concrete():
            values = None
        else:
            values = _numeric_assignment(rs, spec)
            notes.append(f"numeric check at {values}, the smallest balanced assignment meeting the threshold")
        num = certify_numeric(jac, values, grid, refine_iters)
        if report is None:
            report = num
        else:
            report.numeric = num.numeric
            report.timings.update(num.timings)
            if report.verdict is Verdict.CERTIFIED and num.verdict is Verdict.FAILED:
                report.verdict = Verdict.FAILED
                notes.append("numeric search contradicts the symbolic certificate")
            elif report.verdict is not Verdict.CERTIFIED:
                report.verdict = num.verdict
    if report.verdict is Verdict.FAILED:
        notes.append("FAILED concerns this retraction only; it is not a proof that the cone fails to minimize")
    mult_out = {c: str(m) for c, m in native.multiplicities}
    return Run(report, type_label, delta_text, data_type, data_delta, mult_out, orbit_dim, sphere_dim, mode, notes)


# -- table -----------------------------------------------------------------------

_cert_cache: dict = {}


def _builtin_report(data_type, data_delta) -> CertReport:
    key = (data_type, data_delta)
    if key not in _cert_cache:
        _cert_cache[key] = run_certify(data_type, delta=data_delta).report
    return _cert_cache[key]


N_RANGE = range(1, 51)


def _row_condition(report: CertReport, values: dict):
    """Predicate in ``n`` for the certificate's threshold at the row's multiplicities."""
    j = report.jacobian
    cert_mult = j.multiplicities()
    spec = report.threshold
    param_values: dict[str, sympy.Expr] = {}
    for c, m in cert_mult.items():
        v = sympy.sympify(values.get(c, 0))
        if m.is_Integer:
            if sympy.simplify(v - m) != 0:
                return None
            continue
        p = str(m)
        if p in param_values and sympy.simplify(param_values[p] - v) != 0:
            return None
        param_values[p] = v
    n = sympy.Symbol("n")

    def holds(nv):
        sub = {p: int(v.subs(n, nv)) for p, v in param_values.items()}
        if any(sub[p] < 1 for p in sub if p not in spec.vary):
            return False
        return spec.satisfied_by(sub)

    parametric = any(v.free_symbols for v in param_values.values())
    return holds, parametric


def evaluate_row(row: dict, orbit: dict, numeric=True, grid=400) -> dict:
    type_label = row["type"]
    family, r = parse_type(type_label)
    mult = row["mult"]
    native = build_root_system(family, r, mult)
    delta = parse_delta(orbit["delta"], r)
    k, sphere = orbit_dimension(native, delta)
    pk, psphere = parse_dims(orbit["dims"])
    dims_match = sympy.simplify(k - pk) == 0 and sympy.simplify(sphere - psphere) == 0

    alias = _alias_for(type_label)
    data_type, data_delta, data_mult = type_label, delta_label(delta), dict(mult)
    if alias is not None:
        data_type = alias.target
        data_delta = alias.translate_delta(orbit["delta"], r)
        data_mult = alias.translate_mult(mult)
    report = _builtin_report(data_type, data_delta)

    mark = ""
    if report.verdict is Verdict.CERTIFIED:
        cond = _row_condition(report, data_mult)
        if cond is not None:
            holds, parametric = cond
            if parametric:
                ok = [holds(nv) for nv in N_RANGE]
                first = next((i for i in range(len(ok)) if all(ok[i:])), None)
                if first is not None:
                    mark = f"O (n>={N_RANGE[first]})"
            elif holds(0):
                mark = "O"

    out = {
        "type": type_label,
        "pair": row["pair"],
        "multiplicities": {c: str(v) for c, v in mult.items()},
        "orbit": orbit["label"],
        "delta0": delta_label(delta),
        "certificate": f"{data_type}/{data_delta}",
        "threshold": report.threshold.label() if report.threshold else "none",
        "dims": f"({k},{sphere})",
        "printed_dims": orbit["dims"],
        "dims_match": bool(dims_match),
        "flag": "" if dims_match else "DISCREPANCY",
        "mark": mark,
        "printed_mark": orbit["mark"],
        "mark_match": mark == orbit["mark"],
    }
    if not mark and numeric and not native.symbols:
        run = run_certify(data_type, mult=data_mult, delta=data_delta, mode="numeric", grid=grid)
        out["numeric_max_j"] = run.report.numeric.max_j
        out["numeric_verdict"] = run.report.verdict.value
    return out


def evaluate_table(numeric=True, grid=400) -> list[dict]:
    return [evaluate_row(row, orbit, numeric, grid) for row in table_rows() for orbit in row["orbits"]]
