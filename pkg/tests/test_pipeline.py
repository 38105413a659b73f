import pytest
import sympy

from conecert.catalog import aliases, builtin_ansatze, parse_dims, parse_mult, table_rows
from conecert.errors import ConeCertError
from conecert.pipeline import evaluate_table, run_certify
from conecert.verdict import Verdict


def test_catalog_covers_printed_cases():
    keys = set(builtin_ansatze())
    assert {"A2/a1", "A2/a2", "B2/a1", "B2/a2", "BC2/a1", "BC2/a2", "G2/a1", "G2/a2", "A3/a1,a3"} <= keys


def test_c2_alias_swaps_labels():
    alias = aliases()["C2"]
    assert alias.target == "B2"
    assert alias.translate_delta("a1", 2) == "a2"
    assert alias.translate_mult({"m1": "4", "m2": "3"}) == {"m1": "3", "m2": "4"}


@pytest.mark.parametrize("text,expected", [
    ("2", {"m1": "2", "m2": "2"}),
    ("1,n", {"m1": "1", "m2": "n"}),
    ("m1=4, m2=3", {"m1": "4", "m2": "3"}),
    (None, None),
])
def test_parse_mult(text, expected):
    assert parse_mult(text, "B2") == expected


@pytest.mark.parametrize("text", ["1,2,3", "m1=1,2"])
def test_parse_mult_errors(text):
    with pytest.raises(ConeCertError) as exc:
        parse_mult(text, "B2")
    assert exc.value.code == "BAD_MULT"


def test_parse_dims():
    n = sympy.Symbol("n")
    assert parse_dims("(2n+3,4n+7)") == (2 * n + 3, 4 * n + 7)


def test_run_certify_default_threshold_and_dims():
    run = run_certify("A2", delta="a1", threshold=2)
    assert run.verdict is Verdict.CERTIFIED
    assert run.orbit_dim == "2*m" and run.sphere_dim == "3*m + 1"
    assert run.report.threshold.label() == "m >= 2"


def test_run_certify_c2_via_b2():
    run = run_certify("C2", mult="4,3", delta="a1")
    assert run.verdict is Verdict.CERTIFIED
    assert (run.orbit_dim, run.sphere_dim) == ("11", "15")
    assert run.data_type == "B2" and run.data_delta == "a2"


def test_run_certify_both_modes_agree():
    run = run_certify("G2", mult="2", delta="a1", mode="both", grid=150)
    assert run.verdict is Verdict.CERTIFIED and run.report.numeric.max_j <= 1 + 1e-9


def test_run_certify_numeric_for_symbolic_uses_threshold_assignment():
    run = run_certify("BC2", delta="a1", mode="numeric", grid=100)
    assert run.verdict is Verdict.NUMERICALLY_SUPPORTED
    assert any("smallest balanced assignment" in n for n in run.notes)


def test_blank_cell_reports_max_without_claim():
    run = run_certify("A2", mult="1", delta="a1", mode="numeric", grid=200)
    assert run.report.numeric.max_j > 1
    assert any("this retraction only" in n for n in run.notes)


@pytest.mark.parametrize("kwargs,code", [
    ({"type_label": "A2"}, "USAGE"),
    ({"type_label": None, "delta": "a1"}, "USAGE"),
    ({"type_label": "A3", "delta": "a1"}, "NO_ANSATZ"),
    ({"type_label": "A2", "delta": "a1", "mode": "fast"}, "USAGE"),
])
def test_run_certify_errors(kwargs, code):
    with pytest.raises(ConeCertError) as exc:
        run_certify(**kwargs)
    assert exc.value.code == code


def test_search_when_no_builtin(monkeypatch):
    import conecert.pipeline as pipeline

    monkeypatch.setattr(pipeline, "find_builtin", lambda *args: None)
    run = run_certify("A2", delta="a1", threshold=2, search=True)
    assert run.verdict is Verdict.CERTIFIED
    assert run.report.jacobian.ansatz.source == "search"
    assert any("found by search" in n for n in run.notes)


def test_search_exhaustion_is_reported():
    with pytest.raises(ConeCertError) as exc:
        run_certify("A2", mult="2", delta="a1,a2", search=True)
    assert exc.value.code == "NO_ANSATZ" and "exhausted" in exc.value.message


@pytest.fixture(scope="module")
def table():
    return evaluate_table(numeric=True, grid=200)


def test_table_has_every_row(table):
    assert len(table) == sum(len(r["orbits"]) for r in table_rows()) == 32


def test_table_marks_match(table):
    assert all(r["mark_match"] for r in table)


def test_table_dims(table):
    flagged = [(r["type"], r["pair"], r["orbit"]) for r in table if not r["dims_match"]]
    assert flagged == [("BC2", "(SU(4+n), S(U(2)xU(2+n)))", "A1")]
    row = next(r for r in table if r["flag"])
    assert row["flag"] == "DISCREPANCY" and row["dims"] == "(2*n + 5,4*n + 7)"
    c2 = [r["dims"] for r in table if r["pair"] == "(Sp(4), Sp(2)xSp(2))"]
    assert c2 == ["(11,15)", "(10,15)"]
    assert {r["dims"] for r in table if r["pair"] == "(G2xG2, G2)"} == {"(10,13)"}


def test_table_blank_cells_have_numeric_max(table):
    for r in table:
        if not r["mark"]:
            assert r["numeric_max_j"] > 1
