import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from bundletk import (
    FiberSpec,
    FrameFactor,
    GaugeMap,
    GeneralTransport,
    GroupoidViolation,
    LinearTransport,
    PathGrid,
    SingularFactor,
    apply_gauge,
    as_general,
    factor_from_transport,
    transport_matrix,
    verify_groupoid,
)
from gen import random_factor


def test_identity_factor_gives_identity_transport():
    grid = PathGrid.uniform(4)
    t = LinearTransport(FrameFactor.identity(grid, FiberSpec(3)))
    for i in range(4):
        for j in range(4):
            assert np.array_equal(t.matrix(i, j), np.eye(3))


def test_same_sample_is_exact_identity():
    rng = np.random.default_rng(0)
    t = LinearTransport(random_factor(rng, PathGrid.uniform(5), 3))
    for i in range(5):
        assert np.array_equal(t.matrix(i, i), np.eye(3))


def test_scalar_exponential_factor():
    # one-dimensional fibre, F(s) = [e^s]: the transport is [e^{s_i - s_j}]
    params = (0.0, 0.5, 1.25, 2.0)
    grid = PathGrid(params, tuple("abcd"))
    factor = FrameFactor(
        grid, FiberSpec(1), tuple(np.array([[np.exp(s)]]) for s in params)
    )
    t = LinearTransport(factor)
    for i in range(4):
        for j in range(4):
            expected = np.exp(params[i] - params[j])
            assert transport_matrix(t, i, j)[0, 0] == pytest.approx(expected)


def test_singular_factor_rejected():
    grid = PathGrid.uniform(2)
    with pytest.raises(SingularFactor):
        FrameFactor(grid, FiberSpec(2), (np.eye(2), np.array([[1.0, 1.0], [1.0, 1.0]])))


def test_groupoid_passes_for_linear_transport():
    rng = np.random.default_rng(1)
    t = LinearTransport(random_factor(rng, PathGrid.uniform(6), 4))
    report = verify_groupoid(t, 1e-10)
    assert report.passed
    assert report.max_residual <= 1e-12


def test_groupoid_translation_flow_passes():
    grid = PathGrid.uniform(5)
    c = np.array([1.0, -2.0])

    def shift(i, j, v):
        return v + (grid.params[j] - grid.params[i]) * c

    t = GeneralTransport(grid, FiberSpec(2), shift)
    assert verify_groupoid(t, 1e-12).passed


def test_groupoid_doubling_map_fails():
    grid = PathGrid.uniform(3)

    def double(i, j, v):
        return v if i == j else 2.0 * v

    report = verify_groupoid(GeneralTransport(grid, FiberSpec(2), double), 1e-9)
    assert not report.passed
    assert report.worst_triple is not None


def test_factor_from_identity_family():
    grid = PathGrid.uniform(3)
    factor = factor_from_transport(grid, FiberSpec(2), lambda i, j: np.eye(2))
    for m in factor.matrices:
        assert np.array_equal(m, np.eye(2))


def test_factor_from_scalar_exponential_family():
    params = (0.0, 0.4, 1.1)
    grid = PathGrid(params, tuple("abc"))
    factor = factor_from_transport(
        grid,
        FiberSpec(1),
        lambda i, j: np.array([[np.exp(params[i] - params[j])]]),
        anchor=0,
    )
    for k, s in enumerate(params):
        assert factor.matrices[k][0, 0] == pytest.approx(np.exp(s))


def test_factor_round_trip_reproduces_transport():
    rng = np.random.default_rng(2)
    grid = PathGrid.uniform(5)
    t = LinearTransport(random_factor(rng, grid, 3))
    rebuilt = LinearTransport(factor_from_transport(grid, t.fiber, t.matrix, anchor=2))
    for i in range(5):
        for j in range(5):
            np.testing.assert_allclose(
                rebuilt.matrix(i, j), t.matrix(i, j), atol=1e-12
            )
    assert np.array_equal(rebuilt.factor.matrices[2], np.eye(3))


def test_factor_from_transport_rejects_bad_family():
    grid = PathGrid.uniform(3)
    with pytest.raises(GroupoidViolation):
        factor_from_transport(
            grid, FiberSpec(2), lambda i, j: np.eye(2) if i == j else 2.0 * np.eye(2)
        )


def test_gauge_identity_is_noop():
    rng = np.random.default_rng(3)
    factor = random_factor(rng, PathGrid.uniform(4), 2)
    gauged = apply_gauge(factor, GaugeMap(np.eye(2)))
    for a, b in zip(factor.matrices, gauged.matrices):
        np.testing.assert_array_equal(a, b)


def test_gauge_preserves_transport_matrices():
    rng = np.random.default_rng(4)
    grid = PathGrid.uniform(5)
    factor = random_factor(rng, grid, 3)
    t0 = LinearTransport(factor)
    gauge = GaugeMap(rng.standard_normal((3, 3)) + 3.0 * np.eye(3))
    t1 = LinearTransport(apply_gauge(factor, gauge))
    for i in range(5):
        for j in range(5):
            np.testing.assert_allclose(t1.matrix(i, j), t0.matrix(i, j), atol=1e-12)


def test_gauge_on_identity_factor():
    grid = PathGrid.uniform(3)
    factor = FrameFactor.identity(grid, FiberSpec(2))
    gauged = apply_gauge(factor, GaugeMap(np.diag([2.0, 3.0])))
    for m in gauged.matrices:
        np.testing.assert_array_equal(m, np.diag([2.0, 3.0]))
    t = LinearTransport(gauged)
    for i in range(3):
        for j in range(3):
            np.testing.assert_allclose(t.matrix(i, j), np.eye(2), atol=1e-15)


def test_inverse_law():
    rng = np.random.default_rng(5)
    t = LinearTransport(random_factor(rng, PathGrid.uniform(4), 3))
    for i in range(4):
        for j in range(4):
            np.testing.assert_allclose(
                t.matrix(i, j) @ t.matrix(j, i), np.eye(3), atol=1e-12
            )


def test_wrapped_linear_transport_passes_general_check():
    rng = np.random.default_rng(6)
    t = LinearTransport(random_factor(rng, PathGrid.uniform(4), 2))
    assert verify_groupoid(as_general(t), 1e-9).passed


@settings(max_examples=40, deadline=None)
@given(
    seed=hst.integers(0, 2**32 - 1),
    n=hst.sampled_from([1, 2, 4, 8]),
    samples=hst.integers(2, 12),
)
def test_groupoid_residual_bound_property(seed, n, samples):
    rng = np.random.default_rng(seed)
    # spread kept small enough that the determinant floor |det| > 1e-12 |A|^n
    # cannot reject an n=8 draw
    factor = random_factor(rng, PathGrid.uniform(samples), n, log_spread=1.2)
    report = verify_groupoid(LinearTransport(factor), 1e-10)
    assert report.passed, report.max_residual
