import math

import numpy as np
import pytest

from conecert.errors import EvalDomainError
from conecert.numeric import (
    BaseModel,
    ProductModel,
    _compositions,
    _grid_chunks,
    maximize_j,
    simplex_grid_size,
    thread_count,
)
from conecert.verdict import Verdict

from conftest import builtin_jacobian


@pytest.mark.parametrize("n,dim", [(5, 1), (7, 2), (10, 3), (12, 4)])
def test_compositions_enumerate_simplex(n, dim):
    C = _compositions(n, dim)
    assert len(C) == simplex_grid_size(n, dim)
    assert np.all(C.sum(axis=1) == n) and np.all(C >= 0)
    assert len({tuple(r) for r in C}) == len(C)


def test_chunks_cover_grid(monkeypatch):
    import conecert.numeric as numeric

    monkeypatch.setattr(numeric, "CHUNK", 50)
    rows = np.vstack(list(_grid_chunks(20, 4)))
    assert len(rows) == simplex_grid_size(20, 4) == len({tuple(r) for r in rows})


def test_thread_count(monkeypatch):
    monkeypatch.setenv("CONE_CERT_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("CONE_CERT_THREADS", "junk")
    assert thread_count() >= 1


def a2_model(m=2):
    return BaseModel(builtin_jacobian("A2", "a1", {"m": m}))


def test_base_model_matches_jacobian():
    model = a2_model()
    x = np.array([[0.3, 0.7], [2.0, 1.0]])
    direct = [model.jac.value(r) for r in x]
    assert np.allclose(np.exp(model.log_j(x)), direct, rtol=1e-13)
    assert model.k == 4
    assert math.isclose(float(model.mp_j([0.3, 0.7])), direct[0], rel_tol=1e-13)


def _product_f(model, x):
    return math.exp(model.log_f(np.asarray(x)[None, :])[0])


def test_product_model_against_finite_differences():
    left, right = a2_model(), BaseModel(builtin_jacobian("B2", "a1", {"m1": 1, "m2": 2}))
    prod = ProductModel(left, right)
    gram = np.zeros((4, 4))
    gram[:2, :2] = [[float(c) for c in row] for row in left.jac.rs.gram]
    gram[2:, 2:] = [[float(c) for c in row] for row in right.jac.rs.gram]
    rng = np.random.default_rng(5)
    for _ in range(30):
        x = rng.uniform(0.1, 2, size=4)
        g = np.zeros(4)
        for k in range(4):
            e = np.zeros(4)
            e[k] = 1e-6 * x[k]
            g[k] = (_product_f(prod, x + e) - _product_f(prod, x - e)) / (2e-6 * x[k])
        fd = g @ gram @ g
        sym = math.exp(prod.log_grad2(x[None, :])[0])
        assert abs(sym - fd) / sym < 1e-7


def test_product_normalization_and_ray():
    left, right = a2_model(), a2_model(4)
    prod = ProductModel(left, right)
    assert math.isclose(prod.a1**2 + prod.a2**2, 1.0)
    a = prod.base_direction()
    for t in (0.5, 1.0, 3.0):
        # f(tA) = t and J = 1 along the ray
        assert math.isclose(_product_f(prod, t * a), t, rel_tol=1e-12)
        assert math.isclose(prod.j(t * a), 1.0, rel_tol=1e-10)


def test_product_diagonal_identity():
    # f1 = a1 t, f2 = a2 t gives f = t
    left, right = a2_model(), a2_model()
    prod = ProductModel(left, right)
    t = 2.5
    x = np.concatenate([prod.a1 * t * left.base_direction(), prod.a2 * t * right.base_direction()])
    assert math.isclose(_product_f(prod, x), t, rel_tol=1e-12)


def test_maximize_blank_cell():
    r = maximize_j(a2_model(1), 400)
    assert r.verdict is Verdict.FAILED
    assert math.isclose(r.max_j, 2 / math.sqrt(3), rel_tol=1e-6)


def test_eval_domain_retry():
    class Flaky(BaseModel):
        calls = 0

        def log_j(self, X):
            Flaky.calls += 1
            if Flaky.calls == 1:
                return np.full(np.atleast_2d(X).shape[0], np.nan)
            return super().log_j(X)

    model = Flaky(builtin_jacobian("A2", "a1", {"m": 2}))
    r = maximize_j(model, 50)
    assert r.barrier == pytest.approx(1e-8)
    assert r.verdict is Verdict.NUMERICALLY_SUPPORTED


def test_eval_domain_raised_when_retry_fails():
    class Broken(BaseModel):
        def log_j(self, X):
            return np.full(np.atleast_2d(X).shape[0], np.nan)

    with pytest.raises(EvalDomainError):
        maximize_j(Broken(builtin_jacobian("A2", "a1", {"m": 2})), 10)


def test_result_dict():
    r = maximize_j(a2_model(), 60)
    d = r.to_dict()
    assert d["verdict"] == "NUMERICALLY_SUPPORTED" and d["grid_n"] == 60 and "max_j_extended" in d
