from fractions import Fraction as Fr

import numpy as np
import pytest

from conecert.certify import ThresholdSpec, certify_numeric, certify_symbolic, default_threshold, ray_values
from conecert.errors import ConeCertError
from conecert.numeric import BaseModel, maximize_j
from conecert.polynomial import Poly
from conecert.retraction import assemble_jacobian, validate_ansatz
from conecert.rootdata import build_root_system
from conecert.verdict import Verdict

from conftest import builtin_jacobian

x1, x2 = Poly.variable(0, 2), Poly.variable(1, 2)

SYMBOLIC = [
    ("A2", "a1", ThresholdSpec(("m",), 2)),
    ("A2", "a2", ThresholdSpec(("m",), 2)),
    ("B2", "a1", ThresholdSpec(("m2",), 2)),
    ("B2", "a2", ThresholdSpec(("m2",), 2)),
    ("BC2", "a1", ThresholdSpec(("m2", "m3"), 2)),
    ("BC2", "a2", ThresholdSpec(("m2", "m3"), 2)),
    ("G2", "a1", ThresholdSpec(("m",), 2)),
    ("G2", "a2", ThresholdSpec(("m",), 2)),
    ("A3", "a1,a3", ThresholdSpec(("m",), 4)),
]


@pytest.mark.parametrize("label,delta,spec", SYMBOLIC, ids=lambda v: str(v))
def test_symbolic_certificates(label, delta, spec):
    report = certify_symbolic(builtin_jacobian(label, delta), spec)
    assert report.verdict is Verdict.CERTIFIED
    assert report.j2_le_1
    assert report.stage("i") and report.stage("ii")
    assert all(q.ok for q in report.inequalities)


def test_a2_stage_polynomials():
    report = certify_symbolic(builtin_jacobian("A2", "a1"), ThresholdSpec(("m",), 2))
    (s1,), (s2,) = report.stage("i"), report.stage("ii")
    assert s1.power == 3 and s1.difference == Fr(3, 4) * x1 * x2**2 + x2**3
    assert s2.power == 6
    content, prim = s2.difference.primitive()
    assert [int(c) for _, c in prim.sorted_terms()] == [
        216, 2376, 11925, 35838, 71120, 96888, 91152, 57888, 23328, 5184, 432]
    assert [e for e, _ in prim.sorted_terms()] == [(10 - i, 2 + i) for i in range(11)]


def test_a2_threshold_too_small_is_inconclusive():
    report = certify_symbolic(builtin_jacobian("A2", "a1"), ThresholdSpec(("m",), 1))
    assert report.verdict is Verdict.INCONCLUSIVE
    # stage (i) still holds; the product J1 * G alone is not below 1
    assert report.j2_le_1 and not report.stage("ii")[0].ok


def test_concrete_multiplicities_no_threshold():
    j = builtin_jacobian("A2", "a1", {"m": 4})
    report = certify_symbolic(j)
    assert report.threshold == ThresholdSpec()
    assert report.verdict is Verdict.CERTIFIED and report.j2_le_1
    one = certify_symbolic(builtin_jacobian("A2", "a1", {"m": 1}))
    assert one.verdict is Verdict.INCONCLUSIVE


def test_g2_a2_ansatz_is_printed_one():
    j = builtin_jacobian("G2", "a2")
    ans = j.ansatz
    rng = np.random.default_rng(0)
    for x in rng.uniform(0.1, 5, size=(20, 2)):
        assert np.isclose(ans(x), np.sqrt(4 / 3 * x[1] * (3 * x[0] + x[1])), rtol=1e-13)


@pytest.mark.parametrize("vary,t", [(("q",), 2), (("m",), 0)])
def test_bad_threshold(vary, t):
    with pytest.raises(ConeCertError) as exc:
        certify_symbolic(builtin_jacobian("A2", "a1"), ThresholdSpec(vary, t))
    assert exc.value.code == "BAD_THRESHOLD"


def test_threshold_spec_validation():
    with pytest.raises(ConeCertError):
        ThresholdSpec((), 2)
    spec = ThresholdSpec(("m2", "m3"), 2)
    assert spec.label() == "m2 + m3 >= 2"
    assert spec.satisfied_by({"m2": 1, "m3": 1}) and not spec.satisfied_by({"m2": 1})


def test_default_threshold():
    assert default_threshold(builtin_jacobian("BC2", "a1")) == ThresholdSpec(("m1", "m2", "m3"), 2)
    assert default_threshold(builtin_jacobian("A2", "a1", {"m": 2})) == ThresholdSpec()


def test_numeric_a2_max_on_ray():
    j = builtin_jacobian("A2", "a1", {"m": 2})
    report = certify_numeric(j, grid_n=400)
    r = report.numeric
    assert report.verdict is Verdict.NUMERICALLY_SUPPORTED
    assert abs(r.max_j - 1) < 1e-9
    a = np.array(j.ansatz.base.coords)
    assert np.allclose(np.array(r.argmax) / sum(r.argmax), a / a.sum(), atol=1e-4)
    assert r.confirmed_mp is not None


def test_numeric_perturbed_exponents_fail():
    rs = build_root_system("A", 2, 2)
    ans = validate_ansatz(rs, {0}, [((1, 0), Fr(3, 4)), ((1, Fr(3, 2)), Fr(1, 4))])
    report = certify_numeric(assemble_jacobian(ans), grid_n=400)
    assert report.verdict is Verdict.FAILED
    assert report.numeric.max_j > 1 + 1e-9
    # the witness is real: re-evaluate at the reported point
    assert assemble_jacobian(ans).value(np.array(report.numeric.argmax)) > 1 + 1e-9


def test_numeric_b2_supported():
    j = builtin_jacobian("B2", "a1", {"m1": 1, "m2": 2})
    report = certify_numeric(j, grid_n=400)
    assert report.verdict is Verdict.NUMERICALLY_SUPPORTED
    assert report.numeric.max_j <= 1 + 1e-9


def test_numeric_requires_concrete():
    with pytest.raises(ConeCertError):
        certify_numeric(builtin_jacobian("A2", "a1"), grid_n=10)


@pytest.mark.parametrize("label,delta,mult", [("A2", "a1", {"m": 2}), ("G2", "a2", {"m1": 2, "m2": 2}),
                                              ("A2", "a1", {"m": 1})])
def test_scale_invariance(label, delta, mult):
    model = BaseModel(builtin_jacobian(label, delta, mult))
    r1 = maximize_j(model, 200)
    r2 = maximize_j(model, 200, scale=2.0)
    assert abs(r1.max_j - r2.max_j) < 1e-9


def test_ray_values():
    assert np.allclose(ray_values(builtin_jacobian("A3", "a1,a3", {"m": 4})), 1, atol=1e-12)


@pytest.mark.parametrize("label,delta,spec,values", [
    ("A2", "a1", ThresholdSpec(("m",), 2), [{"m": 2}, {"m": 3}, {"m": 8}]),
    ("BC2", "a1", ThresholdSpec(("m2", "m3"), 2), [{"m1": 1, "m2": 1, "m3": 1}, {"m1": 3, "m2": 2, "m3": 1}]),
    ("G2", "a1", ThresholdSpec(("m",), 2), [{"m1": 2, "m2": 2}, {"m1": 3, "m2": 3}]),
])
def test_symbolic_implies_numeric(label, delta, spec, values):
    j = builtin_jacobian(label, delta)
    assert certify_symbolic(j, spec).verdict is Verdict.CERTIFIED
    for v in values:
        assert certify_numeric(j, v, grid_n=200).verdict is not Verdict.FAILED
