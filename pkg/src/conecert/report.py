"""JSON reports: deterministic serialization and reloading for products.

Reports are self-contained. A certify report embeds the data-path system, the
base point, the ansatz factors and the certificate digests, so a product can
be rebuilt from files alone. Floats are written with 17 significant digits and
keys are sorted, so identical runs give byte-identical output (timings are
only included on request).
"""
from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from pathlib import Path

from .certify import CertReport
from .errors import ProductError, ReportError
from .numeric import BaseModel, ProductModel
from .orbit import describe_ambient
from .pipeline import Run
from .product import Factor, ProductCase
from .retraction import assemble_jacobian, validate_ansatz
from .rootdata import build_root_system, format_fraction, parse_delta, parse_type
from .verdict import Verdict

SCHEMA = 1


def _float_token(i):
    return f"@@float{i}@@"


def dumps(doc) -> str:
    """JSON text with sorted keys and ``%.17g`` floats."""
    floats = []

    def walk(obj):
        if isinstance(obj, bool) or obj is None:
            return obj
        if isinstance(obj, float):
            if not math.isfinite(obj):
                return str(obj)
            floats.append(format(obj, ".17g"))
            return _float_token(len(floats) - 1)
        if isinstance(obj, dict):
            return {str(k): walk(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [walk(v) for v in obj]
        return obj

    text = json.dumps(walk(doc), sort_keys=True, indent=2, ensure_ascii=False)
    return re.sub(r'"@@float(\d+)@@"', lambda m: floats[int(m.group(1))], text) + "\n"


def _certificate_block(report: CertReport, dump=False):
    return [q.to_dict(dump) for q in report.inequalities]


def run_to_dict(run: Run, timings=False, dump=False) -> dict:
    report = run.report
    j = report.jacobian
    ans = j.ansatz
    base = ans.base
    doc = {
        "schema": SCHEMA,
        "kind": "certify",
        "system": {"type": run.type_label, "multiplicities": run.multiplicities},
        "delta0": run.delta,
        "orbit": {"dimension": run.orbit_dim, "sphere": run.sphere_dim},
        "data_path": {
            "type": ans.rs.label,
            "delta0": run.data_delta,
            "multiplicities": {c: str(m) for c, m in ans.rs.multiplicities},
        },
        "base_point": {
            "coords": list(base.coords),
            "ambient": list(base.ambient),
            "closed_form": describe_ambient(ans.rs, base),
            "exact_direction": [format_fraction(c) for c in base.exact_direction],
            "norm_squared": format_fraction(base.norm_squared),
            "residual": base.residual,
        },
        "ansatz": ans.to_dict(),
        "threshold": None
        if report.threshold is None
        else {
            "vary": list(report.threshold.vary),
            "t": report.threshold.t,
            "condition": report.threshold.label(),
        },
        "certificates": _certificate_block(report, dump),
        "numeric": report.numeric.to_dict() if report.numeric else None,
        "verdict": report.verdict.value,
        "j2_le_1": bool(report.j2_le_1),
        "mode": run.mode,
        "notes": list(run.notes) + list(report.notes),
    }
    if timings:
        doc["timings"] = dict(report.timings)
    return doc


def product_to_dict(case: ProductCase, left_doc: dict, right_doc: dict) -> dict:
    a1, a2 = case.a
    return {
        "schema": SCHEMA,
        "kind": "product",
        "left": left_doc,
        "right": right_doc,
        "orbit": {"dimension": str(case.k)},
        "weights": [a1, a2],
        "verdict": case.verdict.value,
        "j2_le_1": bool(case.j2_le_1),
        "numeric": case.numeric.to_dict() if case.numeric else None,
        "notes": list(case.notes),
    }


# -- loading ---------------------------------------------------------------------


def load_report(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError("BAD_REPORT", f"cannot read report {path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise ReportError("BAD_REPORT", f"{path} is not a schema-{SCHEMA} report")
    return doc


def _need(doc, *keys):
    for k in keys:
        if k not in doc:
            raise ReportError("BAD_REPORT", f"report is missing {k!r}")


def factor_from_dict(doc: dict) -> Factor:
    """Rebuild a composable factor from a report document."""
    kind = doc.get("kind")
    if kind == "product":
        _need(doc, "left", "right", "verdict")
        left, right = factor_from_dict(doc["left"]), factor_from_dict(doc["right"])
        return Factor(
            ProductModel(left.model, right.model),
            left.k + right.k,
            Verdict(doc["verdict"]),
            bool(doc.get("j2_le_1", False)),
            f"({left.label}) x ({right.label})",
            doc,
        )
    if kind != "certify":
        raise ReportError("BAD_REPORT", f"unknown report kind {kind!r}")
    _need(doc, "data_path", "ansatz", "verdict", "orbit")
    if "j2_le_1" not in doc:
        raise ProductError("HYPOTHESIS_MISSING", "report carries no 'J2 <= 1' record")
    data = doc["data_path"]
    try:
        family, rank = parse_type(data["type"])
        rs = build_root_system(family, rank, data["multiplicities"])
        delta0 = parse_delta(data["delta0"], rank)
        factors = [
            (tuple(Fraction(c) for c in f["coeffs"]), Fraction(f["exponent"])) for f in doc["ansatz"]["factors"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportError("BAD_REPORT", f"malformed report: {exc}") from None
    if not rs.is_concrete():
        raise ReportError("BAD_REPORT", "products need concrete multiplicities; rerun certify with --mult")
    ans = validate_ansatz(rs, delta0, factors, source=doc["ansatz"].get("source", "report"))
    model = BaseModel(assemble_jacobian(ans))
    try:
        k = int(doc["orbit"]["dimension"])
    except (KeyError, ValueError):
        raise ReportError("BAD_REPORT", "orbit dimension is not an integer") from None
    if k != model.k:
        raise ReportError("BAD_REPORT", f"stored orbit dimension {k} disagrees with recomputed {model.k}")
    label = f"{doc['system']['type']}{{{doc['delta0']}}}"
    return Factor(model, k, Verdict(doc["verdict"]), bool(doc["j2_le_1"]), label, doc)


def write_text(path, text):
    if path is None or path == "-":
        return
    Path(path).write_text(text)
