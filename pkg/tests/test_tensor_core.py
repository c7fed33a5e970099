import numpy as np
import pytest

from conftest import loop_conv2d
from tensor_core import (
    DimensionError,
    NumericError,
    ParameterError,
    ShapeError,
    col2im_batch,
    ensure_finite,
    im2col,
    im2col_batch,
    matmul,
    sign,
    softmax_temp,
)


def test_matmul_known_values():
    """Test matmul on hand-expanded products"""
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[5.0, 6.0], [7.0, 8.0]])
    assert np.array_equal(matmul(np.eye(2), a), a)
    assert np.array_equal(matmul(np.array([[1.0, 0.0], [0.0, 0.0]]), b), [[5, 6], [0, 0]])
    assert np.array_equal(matmul(a, b), [[19, 22], [43, 50]])


def test_matmul_shape_mismatch_names_both_shapes():
    """Test matmul rejects disagreeing inner extents"""
    with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 2\)"):
        matmul(np.ones((2, 3)), np.ones((2, 2)))


def test_matmul_associativity(rng):
    """Test (AB)C == A(BC) on random small matrices"""
    a, b, c = rng.standard_normal((3, 4)), rng.standard_normal((4, 5)), rng.standard_normal((5, 2))
    left = matmul(matmul(a, b), c)
    right = matmul(a, matmul(b, c))
    assert np.max(np.abs(left - right)) <= 1e-9 * np.max(np.abs(left))


def test_softmax_temp_known_values():
    """Test softmax with temperature on symmetric, known and hard-max inputs"""
    assert np.allclose(softmax_temp(np.array([5.0, 5.0, 5.0])), [1 / 3, 1 / 3, 1 / 3], atol=1e-15)
    assert np.allclose(softmax_temp(np.array([2.0, 0.0])), [0.880797, 0.119203], atol=1e-6)
    assert softmax_temp(np.array([2.0, 0.0]), tau=0.01).max() >= 1 - 1e-6


def test_softmax_temp_slices_sum_to_one_and_shift_invariant(rng):
    """Test normalization and shift invariance across temperatures"""
    v = rng.standard_normal((6, 5)) * 4
    for tau in (0.1, 1.0, 10.0):
        u = softmax_temp(v, tau)
        assert np.all(np.abs(u.sum(axis=-1) - 1) < 1e-12)
        assert np.max(np.abs(softmax_temp(v + 7.5, tau) - u)) < 1e-12


def test_softmax_temp_is_stable_for_large_inputs():
    """Test max subtraction keeps huge logits finite"""
    assert np.allclose(softmax_temp(np.array([1000.0, 1000.0])), [0.5, 0.5])


def test_softmax_temp_rejects_nonpositive_tau():
    """Test tau <= 0 is a parameter error"""
    with pytest.raises(ParameterError):
        softmax_temp(np.array([1.0, 2.0]), tau=0.0)


def test_sign_known_values():
    """Test sign on the zero, subnormal and mixed cases"""
    assert np.array_equal(sign(np.array([-3.5, 0.0, 2.1])), [-1, 0, 1])
    assert np.array_equal(sign(np.zeros(4)), np.zeros(4))
    assert np.array_equal(sign(np.array([1e-300, -1e-300])), [1, -1])


def test_sign_times_abs_reconstructs_input(rng):
    """Test sign(t) * |t| == t exactly"""
    t = rng.standard_normal(50)
    t[::7] = 0.0
    assert np.array_equal(sign(t) * np.abs(t), t)


def test_sign_of_negative_zero_has_no_sign_bit():
    """Test -0.0 maps to +0.0"""
    assert not np.signbit(sign(np.array([-0.0]))[0])


def test_sign_rejects_nan():
    """Test NaN raises a numeric error"""
    with pytest.raises(NumericError):
        sign(np.array([1.0, np.nan]))


def test_im2col_known_values():
    """Test im2col column layout on hand-enumerated windows"""
    x = np.arange(1.0, 10.0).reshape(1, 3, 3)
    cols = im2col(x, 2, 2)
    assert np.array_equal(cols.T, [[1, 2, 4, 5], [2, 3, 5, 6], [4, 5, 7, 8], [5, 6, 8, 9]])

    whole = im2col(np.array([[[1.0, 2.0], [3.0, 4.0]]]), 2, 2)
    assert np.array_equal(whole[:, 0], [1, 2, 3, 4])

    image = np.arange(24.0).reshape(2, 3, 4)
    assert np.array_equal(im2col(image, 1, 1), image.reshape(2, 12))


def test_im2col_zero_pads_outside_the_image():
    """Test padding contributes zeros to border patches"""
    cols = im2col(np.ones((1, 2, 2)), 3, 3, pad=1)
    assert cols.shape == (9, 4)
    assert cols[:, 0].sum() == 4.0
    assert cols[0, 0] == 0.0


def test_im2col_kernel_larger_than_input():
    """Test an oversized kernel is a shape error"""
    with pytest.raises(ShapeError):
        im2col(np.ones((1, 2, 2)), 3, 3)


def test_im2col_matmul_matches_loop_convolution(rng):
    """Test lowering + matmul against the nested-loop oracle"""
    for _ in range(20):
        c, h, w = (int(v) for v in rng.integers(1, 6, size=3))
        k = int(rng.integers(1, min(h, w) + 1))
        stride = int(rng.integers(1, 3))
        pad = int(rng.integers(0, 2))
        x = rng.standard_normal((2, c, h, w))
        weight = rng.standard_normal((3, c, k, k))
        cols = im2col_batch(x, k, k, stride, pad)
        lowered = np.einsum("ok,bkp->bop", weight.reshape(3, -1), cols)
        oracle = loop_conv2d(x, weight, stride, pad)
        assert np.max(np.abs(lowered.reshape(oracle.shape) - oracle)) < 1e-10


def test_col2im_is_the_adjoint_of_im2col(rng):
    """Test <im2col(x), c> == <x, col2im(c)>"""
    x = rng.standard_normal((2, 2, 5, 4))
    cols = im2col_batch(x, 3, 2, stride=2, pad=1)
    c = rng.standard_normal(cols.shape)
    back = col2im_batch(c, x.shape, 3, 2, stride=2, pad=1)
    assert np.isclose(np.sum(cols * c), np.sum(x * back), rtol=1e-12)


def test_ensure_finite_names_the_tensor():
    """Test non-finite tensors are rejected with their description"""
    with pytest.raises(NumericError, match="weights of layer 3"):
        ensure_finite(np.array([1.0, np.inf]), "weights of layer 3")
