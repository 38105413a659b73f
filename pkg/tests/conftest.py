import random
from fractions import Fraction

import pytest

from conecert.catalog import find_builtin
from conecert.retraction import assemble_jacobian, validate_ansatz
from conecert.rootdata import build_root_system, parse_delta, parse_type


def builtin_jacobian(type_label, delta, mult=None):
    family, rank = parse_type(type_label)
    b = find_builtin(type_label, delta)
    rs = build_root_system(family, rank, mult if mult is not None else (b.mult or None))
    ans = validate_ansatz(rs, parse_delta(delta, rank), b.factors, source=f"builtin:{b.key}")
    return assemble_jacobian(ans)


def random_chamber_points(rank, count, seed=0, lo=1, hi=50):
    rng = random.Random(seed)
    return [tuple(Fraction(rng.randint(lo, hi), rng.randint(1, 9)) for _ in range(rank)) for _ in range(count)]


# (type, delta, concrete multiplicities satisfying the printed threshold)
CERTIFIED_CASES = [
    ("A2", "a1", {"m": 2}),
    ("A2", "a2", {"m": 2}),
    ("B2", "a1", {"m1": 1, "m2": 2}),
    ("B2", "a2", {"m1": 1, "m2": 2}),
    ("BC2", "a1", {"m1": 2, "m2": 2, "m3": 1}),
    ("BC2", "a2", {"m1": 2, "m2": 2, "m3": 1}),
    ("G2", "a1", {"m1": 2, "m2": 2}),
    ("G2", "a2", {"m1": 2, "m2": 2}),
    ("A3", "a1,a3", {"m": 4}),
]


@pytest.fixture(params=CERTIFIED_CASES, ids=lambda c: f"{c[0]}-{c[1]}")
def certified_case(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
