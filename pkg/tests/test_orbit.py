import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conecert.errors import OrbitError
from conecert.orbit import describe_ambient, mean_curvature, minimal_point, tangential_part, tangential_residual
from conecert.rootdata import build_root_system, parse_delta

s2, s6 = math.sqrt(2), math.sqrt(6)


@pytest.mark.parametrize("label,mult,delta,ambient,text", [
    ("A2", 1, "a1", (2 / s6, -1 / s6, -1 / s6), "(2e1 - e2 - e3)/sqrt(6)"),
    ("A2", 1, "a2", (1 / s6, 1 / s6, -2 / s6), "(e1 + e2 - 2e3)/sqrt(6)"),
    ("B2", 1, "a1", (1.0, 0.0), "e1"),
    ("B2", 1, "a2", (1 / s2, 1 / s2), "(e1 + e2)/sqrt(2)"),
    ("A3", 1, "a1,a3", (1 / s2, 0.0, 0.0, -1 / s2), "(e1 - e4)/sqrt(2)"),
    ("A3", 4, "a1,a3", (1 / s2, 0.0, 0.0, -1 / s2), "(e1 - e4)/sqrt(2)"),
])
def test_printed_base_points(label, mult, delta, ambient, text):
    rs = build_root_system(label, None, mult)
    p = minimal_point(rs, parse_delta(delta, rs.rank))
    assert np.allclose(p.ambient, ambient, atol=1e-12, rtol=0)
    assert p.residual < 1e-12
    assert describe_ambient(rs, p) == text
    assert abs(rs.inner(p.ambient, p.ambient) - 1) < 1e-12


def test_b2_mean_curvature_at_e1_is_radial():
    rs = build_root_system("BC", 2, {"m1": 2, "m2": 2, "m3": 0})
    m = mean_curvature(rs, {0}, (Fraction(1), Fraction(0)))
    assert tangential_part(rs, m, (Fraction(1), Fraction(0))) == (0, 0)


def test_a3_mean_curvature_at_base_point_exact():
    rs = build_root_system("A", 3, 3)
    x = (Fraction(1), Fraction(0), Fraction(1))
    assert all(c == 0 for c in tangential_part(rs, mean_curvature(rs, {0, 2}, x), rs.ambient(x)))


def test_divide_by_zero_on_wall():
    rs = build_root_system("A", 2, 1)
    with pytest.raises(OrbitError) as exc:
        mean_curvature(rs, {0, 1}, (1.0, 0.0))
    assert exc.value.code == "DIVIDE_BY_ZERO"


def test_empty_delta():
    with pytest.raises(OrbitError):
        minimal_point(build_root_system("A", 2, 1), frozenset())


@pytest.mark.parametrize("label,mult", [("A2", 1), ("A2", 2), ("B2", {"m1": 1, "m2": 2}),
                                        ("BC2", {"m1": 2, "m2": 3, "m3": 1}), ("G2", 1), ("A3", 1)])
def test_full_chamber_newton(label, mult):
    rs = build_root_system(label, None, mult)
    delta = frozenset(range(rs.rank))
    p = minimal_point(rs, delta)
    assert p.residual < 1e-12
    assert all(c > 0 for c in p.coords)
    assert abs(rs.chamber_inner(p.coords, p.coords) - 1) < 1e-12


def test_a2_full_chamber_is_symmetric():
    rs = build_root_system("A", 2, 1)
    p = minimal_point(rs, {0, 1})
    assert abs(p.coords[0] - p.coords[1]) < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(0.05, 20), min_size=2, max_size=2))
def test_solution_independent_of_init_b2(init):
    rs = build_root_system("B", 2, {"m1": 1, "m2": 3})
    ref = minimal_point(rs, {0, 1})
    p = minimal_point(rs, {0, 1}, init=init)
    assert np.allclose(p.coords, ref.coords, atol=1e-10, rtol=0)


@pytest.mark.parametrize("seed", range(10))
def test_solution_independent_of_init_a3(seed):
    rs = build_root_system("A", 3, 1)
    rng = np.random.default_rng(seed)
    init = rng.uniform(0.05, 10, size=3)
    ref = minimal_point(rs, {0, 1, 2})
    p = minimal_point(rs, {0, 1, 2}, init=tuple(init))
    assert np.allclose(p.coords, ref.coords, atol=1e-10, rtol=0)


def test_bad_init():
    with pytest.raises(OrbitError) as exc:
        minimal_point(build_root_system("A", 2, 1), {0, 1}, init=(1.0, -1.0))
    assert exc.value.code == "BAD_INIT"


def test_isolated_faces_have_tiny_residual():
    for label in ("A2", "B2", "G2", "BC2"):
        rs = build_root_system(label, None, 2)
        for a in range(2):
            p = minimal_point(rs, {a})
            assert p.residual < 1e-12
            assert tangential_residual(rs, {a}, p.coords) < 1e-12


def test_symbolic_non_uniform_needs_values():
    rs = build_root_system("B", 2)
    with pytest.raises(OrbitError) as exc:
        minimal_point(rs, {0, 1})
    assert exc.value.code == "SYMBOLIC_MULTIPLICITY"
    p = minimal_point(rs, {0, 1}, multiplicities={"m1": 1, "m2": 2})
    assert p.residual < 1e-12
