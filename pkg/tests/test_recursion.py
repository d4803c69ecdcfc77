import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from wigrot.analysis import unitarity_error
from wigrot.oracle import h_direct, h_direct_dense, h_direct_triangle
from wigrot.recursion import (
    CoeffTriangle,
    apply_negation,
    compute_all,
    compute_subspace,
    dense_rows,
    full_matrix,
    layer_m0,
    layer_m1,
    reduce_beta,
    sweep_backward,
    sweep_forward,
    triangle_index,
    triangle_order,
)

HALF_PI = 0.5 * math.pi
R2 = math.sqrt(2.0)


def seeded_layers(n, beta):
    data = np.zeros((n + 1) ** 2)
    m = np.arange(n + 1)
    data[m * m + m] = layer_m0(n, beta)
    data[m[1:] ** 2 + m[1:] + 1] = layer_m1(n, beta, layer_m0(n + 1, beta))
    return data


def test_triangle_indexing():
    assert triangle_index(0, 0) == 0
    assert triangle_index(-1, 1) == 1
    assert triangle_index(1, 1) == 3
    mp, m = triangle_order(3)
    assert len(mp) == 16
    assert all(triangle_index(int(a), int(b)) == i for i, (a, b) in enumerate(zip(mp, m)))


@pytest.mark.parametrize("beta", [0.0, 0.6, HALF_PI, 2.5, math.pi])
def test_layer_m0_degree_one(beta):
    assert_allclose(layer_m0(1, beta), [math.cos(beta), math.sin(beta) / R2], atol=1e-16)


def test_layer_m0_examples():
    assert_allclose(layer_m0(2, HALF_PI)[0], -0.5, atol=1e-16)
    assert_allclose(layer_m0(6, 0.0), [1, 0, 0, 0, 0, 0, 0], atol=1e-15)


def test_layer_m1_examples():
    assert_allclose(layer_m1(1, HALF_PI, layer_m0(2, HALF_PI))[0], -0.5, atol=1e-15)
    assert_allclose(layer_m1(1, 0.0, layer_m0(2, 0.0))[0], -1.0, atol=1e-15)
    got = layer_m1(2, math.pi / 4, layer_m0(3, math.pi / 4))
    want = [h_direct(2, 1, m, math.pi / 4) for m in (1, 2)]
    assert_allclose(got, want, atol=1e-13)


def test_layer_m1_rejects_bad_input():
    with pytest.raises(ValueError):
        layer_m1(0, 0.3, np.zeros(2))
    with pytest.raises(ValueError):
        layer_m1(3, 0.3, np.zeros(4))


@given(st.integers(1, 16), st.floats(0.0, math.pi))
def test_initial_layers_match_oracle(n, beta):
    want0 = [h_direct(n, m, 0, beta) for m in range(n + 1)]
    want1 = [h_direct(n, 1, m, beta) for m in range(1, n + 1)]
    assert_allclose(layer_m0(n, beta), want0, atol=1e-13)
    assert_allclose(layer_m1(n, beta, layer_m0(n + 1, beta)), want1, atol=1e-13)


def test_sweeps_degree_two():
    data = seeded_layers(2, HALF_PI)
    sweep_forward(data, 2)
    tri = CoeffTriangle(2, HALF_PI, data)
    assert_allclose(tri.get(2, 2), 0.25, atol=1e-15)
    data0 = seeded_layers(2, 0.0)
    sweep_forward(data0, 2)
    assert_allclose(CoeffTriangle(2, 0.0, data0).get(2, 2), 1.0, atol=1e-15)


def test_sweeps_degree_one_negative_layer():
    for beta, want in ((HALF_PI, 0.5), (0.0, 0.0), (1.1, math.sin(0.55) ** 2)):
        data = seeded_layers(1, beta)
        sweep_backward(data, 1)
        assert_allclose(CoeffTriangle(1, beta, data).get(-1, 1), want, atol=1e-15)


def test_forward_sweep_degree_eight():
    beta = 0.75 * math.pi
    data = seeded_layers(8, beta)
    sweep_forward(data, 8)
    assert_allclose(data, h_direct_triangle(8, beta).data, atol=1e-12)


def test_backward_sweep_degree_eight_lower_part():
    beta = math.pi / 4
    data = seeded_layers(8, beta)
    sweep_backward(data, 8)
    mp, _ = triangle_order(8)
    lower = mp < 0
    assert_allclose(data[lower], h_direct_triangle(8, beta).data[lower], atol=1e-12)


def test_sweep_rejects_wrong_storage():
    with pytest.raises(TypeError):
        sweep_forward(np.zeros(9, dtype=np.float32), 2)


def test_degree_zero_and_one():
    assert_array_equal(compute_subspace(0, 2.2).data, [1.0])
    tri = compute_subspace(1, math.pi / 3)
    assert_allclose(tri.get(1, 1), -0.75, atol=1e-15)
    assert_allclose(tri.get(0, 0), 0.5, atol=1e-15)
    assert_allclose(tri.get(1, 0), math.sqrt(3) / (2 * R2), atol=1e-15)


def test_degree_twelve_against_oracle():
    assert_allclose(compute_subspace(12, 2.0).data, h_direct_triangle(12, 2.0).data, atol=1e-11)


@given(st.integers(0, 16), st.floats(0.0, math.pi))
def test_matches_oracle(n, beta):
    assert_allclose(compute_subspace(n, beta).to_dense(), h_direct_dense(n, beta), atol=1e-12)


@given(st.integers(0, 12))
def test_identity_at_zero_and_flip_at_pi(n):
    k = np.arange(-n, n + 1)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    assert_allclose(compute_subspace(n, 0.0).to_dense(), np.diag(sign), atol=1e-14)
    # H(pi) = (-1)^{n+m'+m} H^{-m',m}(0): anti-diagonal with entries (-1)^{n+m'}
    flip = np.fliplr(np.diag((-1.0) ** (n + k)))
    assert_allclose(compute_subspace(n, math.pi).to_dense(), flip, atol=1e-14)


@given(st.integers(1, 200), st.floats(0.0, math.pi))
def test_orthogonal(n, beta):
    assert unitarity_error(compute_subspace(n, beta)) <= 1e-12


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        compute_subspace(3, -0.1)
    with pytest.raises(ValueError):
        compute_subspace(3, 3.2)
    with pytest.raises(ValueError):
        compute_subspace(-1, 0.5)
    with pytest.raises(ValueError):
        compute_all(0, 0.5)


def test_compute_all_examples():
    (only,) = compute_all(1, 0.4)
    assert_array_equal(only.data, [1.0])
    tris = compute_all(4, HALF_PI)
    assert_array_equal(tris[3].data, compute_subspace(3, HALF_PI).data)
    assert [t.n for t in tris] == [0, 1, 2, 3]


def test_compute_all_orthogonal_at_bandwidth_64():
    assert max(unitarity_error(t) for t in compute_all(64, 1.0)) <= 1e-12


def test_compute_all_independent_of_workers():
    a = compute_all(40, 0.9, workers=1)
    b = compute_all(40, 0.9, workers=3)
    for x, y in zip(a, b):
        assert_array_equal(x.data, y.data)


def test_full_matrix_degree_one():
    m = full_matrix(compute_subspace(1, HALF_PI))
    assert_allclose(m[2], [0.5, 1 / R2, -0.5], atol=1e-15)
    assert_allclose(m[1], [1 / R2, 0.0, 1 / R2], atol=1e-15)
    assert_array_equal(m, m.T)


@given(st.integers(0, 60), st.floats(0.0, math.pi))
def test_full_matrix_symmetries(n, beta):
    m = full_matrix(compute_subspace(n, beta))
    assert_array_equal(m, m.T)
    assert_array_equal(m, m[::-1, ::-1])


def test_full_matrix_memory_cap():
    tri = compute_subspace(20, 0.3)
    with pytest.raises(MemoryError):
        full_matrix(tri, max_bytes=100)


def test_dense_rows_block():
    tri = compute_subspace(9, 1.4)
    assert_array_equal(dense_rows(tri, -2, 3), full_matrix(tri)[7:13])
    with pytest.raises(IndexError):
        dense_rows(tri, 3, 10)


def test_get_resolves_symmetries():
    tri = compute_subspace(6, 0.8)
    m = full_matrix(tri)
    for mp in range(-6, 7):
        for k in range(-6, 7):
            assert tri.get(mp, k) == m[mp + 6, k + 6]
    with pytest.raises(IndexError):
        tri.get(7, 0)
    assert_array_equal(tri.layer(-2), [tri.get(-2, k) for k in range(2, 7)])


@given(st.floats(-20.0, 20.0))
def test_reduce_beta(beta):
    b, negate = reduce_beta(beta)
    assert 0.0 <= b <= math.pi
    target = compute_subspace(5, b)
    got = apply_negation(target, beta) if negate else target
    assert_allclose(got.data, h_direct_triangle(5, beta).data, atol=1e-12)
