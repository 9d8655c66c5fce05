"""Dense-kernel contracts: gemm, activations, log_softmax, mean_rows."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamnmt.errors import ShapeError
from beamnmt.tensor import activate, gemm, log_softmax, log_softmax_rows, mean_rows


def naive_gemm(a, b):
    """Independent triple-loop oracle."""
    rows, inner, cols = a.shape[0], a.shape[1], b.shape[1]
    out = [[0.0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            acc = 0.0
            for k in range(inner):
                acc += float(a[i, k]) * float(b[k, j])
            out[i][j] = acc
    return np.array(out)


class TestGemm:
    def test_identity(self):
        rng = np.random.default_rng(0)
        b = rng.uniform(-1, 1, size=(3, 2)).astype(np.float32)
        eye = np.eye(3, dtype=np.float32)
        np.testing.assert_array_equal(gemm(eye, b), b)

    def test_zeros(self):
        rng = np.random.default_rng(1)
        a = np.zeros((3, 4), dtype=np.float32)
        b = rng.uniform(-1, 1, size=(4, 2)).astype(np.float32)
        np.testing.assert_array_equal(gemm(a, b), np.zeros((3, 2), dtype=np.float32))

    def test_against_triple_loop_oracle(self):
        rng = np.random.default_rng(2)
        a = rng.uniform(-1, 1, size=(7, 5)).astype(np.float32)
        b = rng.uniform(-1, 1, size=(5, 9)).astype(np.float32)
        np.testing.assert_allclose(gemm(a, b), naive_gemm(a, b), rtol=1e-5)

    def test_random_shapes_match_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            m, k, n = rng.integers(1, 17, size=3)
            a = rng.uniform(-2, 2, size=(m, k)).astype(np.float32)
            b = rng.uniform(-2, 2, size=(k, n)).astype(np.float32)
            np.testing.assert_allclose(gemm(a, b), naive_gemm(a, b), rtol=1e-5, atol=1e-6)

    def test_shape_mismatch_names_both_shapes(self):
        a = np.zeros((2, 3), dtype=np.float32)
        b = np.zeros((4, 2), dtype=np.float32)
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(4, 2\)"):
            gemm(a, b)

    def test_pure_and_bitwise_repeatable(self):
        rng = np.random.default_rng(4)
        a = rng.uniform(-1, 1, size=(6, 8)).astype(np.float32)
        b = rng.uniform(-1, 1, size=(8, 5)).astype(np.float32)
        first = gemm(a, b)
        for _ in range(3):
            np.testing.assert_array_equal(gemm(a, b), first)

    def test_float32_dtype_preserved(self):
        a = np.ones((2, 2), dtype=np.float32)
        assert gemm(a, a).dtype == np.float32


class TestActivate:
    def test_sigmoid_at_zero(self):
        t = np.zeros((3, 4), dtype=np.float32)
        np.testing.assert_array_equal(activate("sigmoid", t), np.full((3, 4), 0.5, dtype=np.float32))

    def test_tanh_at_zero(self):
        t = np.zeros((2, 2), dtype=np.float32)
        np.testing.assert_array_equal(activate("tanh", t), np.zeros((2, 2), dtype=np.float32))

    def test_sigmoid_symmetry(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-8, 8, size=(10, 10)).astype(np.float32)
        total = activate("sigmoid", x) + activate("sigmoid", -x)
        np.testing.assert_allclose(total, 1.0, atol=1e-6)

    def test_sigmoid_saturation_is_finite(self):
        x = np.array([[-1000.0, 1000.0]], dtype=np.float32)
        out = activate("sigmoid", x)
        np.testing.assert_array_equal(out, np.array([[0.0, 1.0]], dtype=np.float32))

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="relu"):
            activate("relu", np.zeros((1, 1)))


class TestLogSoftmax:
    def test_uniform_row(self):
        out = log_softmax(np.zeros(4))
        np.testing.assert_allclose(out, [-math.log(4)] * 4, atol=1e-12)

    def test_frozen_oracle_1_2_3(self):
        # Frozen from a 40-digit evaluation of x_i - log(e^1 + e^2 + e^3).
        expected = [-2.4076059644443803, -1.4076059644443803, -0.4076059644443803]
        np.testing.assert_allclose(log_softmax(np.array([1.0, 2.0, 3.0])), expected, atol=1e-6)

    @given(st.floats(-50, 50), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_shift_invariance(self, c, seed):
        x = np.random.default_rng(seed).uniform(-5, 5, size=12)
        np.testing.assert_allclose(log_softmax(x + c), log_softmax(x), atol=1e-6)

    def test_exponentials_sum_to_one_for_wide_rows(self):
        rng = np.random.default_rng(6)
        for n in (1, 7, 300, 30000):
            out = log_softmax(rng.uniform(-10, 10, size=n))
            assert abs(np.exp(out).sum() - 1.0) <= 1e-5
            assert np.all(out <= 0.0)

    def test_empty_row_rejected(self):
        with pytest.raises(ValueError):
            log_softmax(np.array([]))

    def test_rows_variant_matches_single(self):
        rng = np.random.default_rng(7)
        mat = rng.uniform(-3, 3, size=(5, 11))
        batched = log_softmax_rows(mat)
        for i in range(5):
            np.testing.assert_array_equal(batched[i], log_softmax(mat[i]))


class TestMeanRows:
    def test_single_row_identity(self):
        row = np.array([[1.5, -2.0, 3.25]], dtype=np.float32)
        np.testing.assert_array_equal(mean_rows(row), row[0])

    def test_opposite_rows_cancel(self):
        r = np.array([0.5, -1.25, 2.0], dtype=np.float32)
        t = np.stack([r, -r])
        np.testing.assert_array_equal(mean_rows(t), np.zeros(3, dtype=np.float32))

    def test_direct_summation_oracle(self):
        rng = np.random.default_rng(8)
        t = rng.uniform(-1, 1, size=(5, 3)).astype(np.float32)
        expected = [sum(float(t[i, j]) for i in range(5)) / 5 for j in range(3)]
        np.testing.assert_allclose(mean_rows(t), expected, atol=1e-6)

    def test_zero_rows_rejected(self):
        with pytest.raises(ValueError):
            mean_rows(np.zeros((0, 3), dtype=np.float32))
