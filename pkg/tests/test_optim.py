import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from esid.errors import InfeasibleStealth
from esid.optim import (
    Slice,
    ascend,
    ascend_batch,
    feasible_point,
    grid_size,
    project_simplex,
    simplex_grid,
)


def qp_projection(c, m, q):
    """Oracle: argmin ||J - c||^2 over J >= 0 with J.sum(0) @ m = q, by SLSQP."""
    shape = c.shape
    cons = {"type": "eq", "fun": lambda v: v.reshape(shape).sum(axis=0) @ m - q}
    res = minimize(
        lambda v: 0.5 * np.sum((v - c.ravel()) ** 2),
        np.full(c.size, 1.0 / c.size),
        jac=lambda v: v - c.ravel(),
        constraints=[cons],
        bounds=[(0, None)] * c.size,
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 500},
    )
    return res.x.reshape(shape)


def test_project_simplex_examples():
    assert project_simplex(np.array([0.2, 0.8])) == pytest.approx([0.2, 0.8])
    assert project_simplex(np.array([2.0, 0.0])) == pytest.approx([1.0, 0.0])
    assert project_simplex(np.array([1.0, 1.0, 1.0])) == pytest.approx([1 / 3] * 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_slice_projection_matches_qp(seed):
    rng = np.random.default_rng(seed)
    k, nx, nz = 3, 3, 2
    m = rng.dirichlet(np.ones(nz), size=nx)
    q = rng.dirichlet(np.ones(nx)) @ m
    c = rng.normal(size=(k, nx))
    sl = Slice(m, q)
    j = sl.project(c)
    assert j.min() >= 0
    assert sl.residual(j) <= 1e-9
    oracle = qp_projection(c, m, q)
    # the projection onto a convex set is unique
    assert np.max(np.abs(j - oracle)) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_batch_projection_matches_single(seed):
    rng = np.random.default_rng(seed)
    m = rng.dirichlet(np.ones(3), size=4)
    q = rng.dirichlet(np.ones(4)) @ m
    sl = Slice(m, q)
    c = rng.normal(size=(5, 2, 4))
    jb, _, ok = sl.project_batch(c)
    assert ok.all()
    for b in range(5):
        assert np.max(np.abs(jb[b] - Slice(m, q).project(c[b]))) <= 1e-10


def test_empty_slice_raises_and_flags():
    m = np.array([[0.9, 0.1], [0.1, 0.9]])
    sl = Slice(m, np.array([1.0, 0.0]))
    with pytest.raises(InfeasibleStealth):
        sl.project(np.full((1, 2), 0.5))
    _, _, ok = sl.project_batch(np.full((2, 1, 2), 0.5))
    assert not ok.any()


def test_simplex_slice_is_plain_simplex():
    sl = Slice.simplex(3)
    v = np.array([[0.5, 2.0, -1.0]])
    assert sl.project(v)[0] == pytest.approx(project_simplex(v[0]))


def test_feasible_point():
    m = np.array([[0.9, 0.1], [0.1, 0.9]])
    p = feasible_point(m, np.array([0.5, 0.5]))
    assert p @ m == pytest.approx([0.5, 0.5], abs=1e-9)
    assert feasible_point(m, np.array([1.0, 0.0])) is None


def test_simplex_grid():
    g = simplex_grid(3, 4)
    assert g.shape == (grid_size(3, 4), 3) == (15, 3)
    assert np.allclose(g.sum(axis=1), 1.0)
    assert len({tuple(r) for r in g}) == 15


def test_ascend_finds_simplex_maximum_of_concave_quadratic():
    target = np.array([0.7, 0.2, 0.1])

    def fun(x):
        return -float(np.sum((x - target) ** 2)), -2 * (x - target)

    x, f = ascend(np.full(3, 1 / 3), fun, project_simplex)
    assert x == pytest.approx(target, abs=1e-7)
    assert f == pytest.approx(0.0, abs=1e-12)


def test_ascend_batch_agrees_with_ascend():
    m = np.array([[0.8, 0.2], [0.3, 0.7], [0.5, 0.5]])
    q = np.array([0.5, 0.5])
    rng = np.random.default_rng(4)
    targets = rng.normal(size=(4, 2, 3))

    def fun_batch(x, idx):
        d = x - targets[idx]
        return -np.sum(d**2, axis=(1, 2)), -2 * d

    sl = Slice(m, q)
    x0 = sl.project_batch(np.full((4, 2, 3), 1 / 6))[0]
    xb, fb = ascend_batch(x0, fun_batch, sl)
    for b in range(4):
        single = Slice(m, q)
        xs, fs = ascend(x0[b], lambda x: (-float(np.sum((x - targets[b]) ** 2)), -2 * (x - targets[b])), single.project)
        assert fb[b] == pytest.approx(fs, abs=1e-7)
        assert sl.residual(xb[b]) <= 1e-9
