"""
Tests for the autodiff tape: forward values, gradient checks and shape errors.
"""
import numpy as np
import pytest

from app.core.errors import EmptyBatch, ShapeMismatch
from app.core.gradcheck import gradcheck
from app.core.tensor import (
    GradTape,
    Tensor,
    add,
    bce_with_logits,
    clamp,
    concat_cols,
    concat_rows,
    elu,
    flatten,
    is_recording,
    l2_normalize_rows,
    leaky_relu,
    matmul,
    mul,
    no_grad,
    outer_add,
    pairwise_dot,
    relu,
    row_softmax,
    scale,
    sigmoid,
    sub,
    sum_all,
    sum_rows,
    transpose,
)

TOLERANCE = 1e-4


def _away_from_zero(rng, shape, margin=0.1):
    values = rng.normal(size=shape)
    return np.where(np.abs(values) < margin, np.sign(values + 1e-12) * margin, values)


def test_tensor_is_two_dimensional():
    """Test scalars and vectors are promoted to matrices."""
    # Act / Assert
    assert Tensor(3.0).shape == (1, 1)
    assert Tensor([1.0, 2.0]).shape == (1, 2)
    with pytest.raises(ShapeMismatch):
        Tensor(np.zeros((2, 2, 2)))


def test_matmul_forward():
    """Test matmul matches numpy."""
    # Arrange
    a = Tensor([[1.0, 2.0], [3.0, 4.0]])
    b = Tensor([[5.0], [6.0]])

    # Act
    out = matmul(a, b)

    # Assert
    assert out.data.tolist() == [[17.0], [39.0]]


def test_matmul_shape_mismatch():
    """Test incompatible inner dimensions raise ShapeMismatch."""
    # Act / Assert
    with pytest.raises(ShapeMismatch):
        matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


def test_add_rejects_bad_broadcast():
    """Test only same-shape, row or scalar broadcasting is accepted."""
    # Act / Assert
    with pytest.raises(ShapeMismatch):
        add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 1))))


@pytest.mark.parametrize("seed", range(100))
def test_gradcheck_linear_algebra(seed):
    """Test matmul, add with a bias row, mul, sub and transpose against finite differences."""
    # Arrange
    rng = np.random.default_rng(seed)
    a = Tensor(rng.normal(size=(3, 4)))
    b = Tensor(rng.normal(size=(4, 2)))
    bias = Tensor(rng.normal(size=(1, 2)))
    c = Tensor(rng.normal(size=(3, 2)))

    def fn():
        return transpose(sub(mul(add(matmul(a, b), bias), c), scale(c, 0.5)))

    # Act
    error = gradcheck(fn, [a, b, bias, c], rng=rng)

    # Assert
    assert error < TOLERANCE


@pytest.mark.parametrize("seed", range(100))
def test_gradcheck_shape_ops(seed):
    """Test concatenation, flatten, sums and outer_add."""
    # Arrange
    rng = np.random.default_rng(seed)
    a = Tensor(rng.normal(size=(2, 3)))
    b = Tensor(rng.normal(size=(2, 2)))
    col = Tensor(rng.normal(size=(3, 1)))
    row = Tensor(rng.normal(size=(1, 4)))

    def fn():
        joined = concat_cols([a, b])
        stacked = concat_rows([flatten(joined), flatten(joined)])
        return add(sum_rows(stacked), sum_all(outer_add(col, row)))

    # Act
    error = gradcheck(fn, [a, b, col, row], rng=rng)

    # Assert
    assert error < TOLERANCE


@pytest.mark.parametrize("seed", range(100))
def test_gradcheck_nonlinearities(seed):
    """Test relu, leaky_relu, elu and sigmoid away from their kinks."""
    # Arrange
    rng = np.random.default_rng(seed)
    x = Tensor(_away_from_zero(rng, (3, 4)))

    def fn():
        return add(add(relu(x), leaky_relu(x, 0.2)), add(elu(x), sigmoid(x)))

    # Act
    error = gradcheck(fn, [x], rng=rng)

    # Assert
    assert error < TOLERANCE


@pytest.mark.parametrize("seed", range(100))
def test_gradcheck_softmax_and_normalization(seed):
    """Test masked row softmax, row normalization, pairwise dot products and clamp."""
    # Arrange
    rng = np.random.default_rng(seed)
    x = Tensor(rng.normal(size=(3, 3)))
    mask = np.array([[True, True, False], [True, True, True], [False, True, True]])
    a = Tensor(rng.normal(size=(2, 4)))
    b = Tensor(rng.normal(size=(3, 4)))

    def fn():
        attention = row_softmax(x, mask)
        cosine = clamp(pairwise_dot(l2_normalize_rows(a), l2_normalize_rows(b)), -1.0, 1.0)
        return add(sum_all(mul(attention, attention)), sum_all(cosine))

    # Act
    error = gradcheck(fn, [x, a, b], rng=rng)

    # Assert
    assert error < TOLERANCE


@pytest.mark.parametrize("seed", range(100))
def test_gradcheck_bce(seed):
    """Test the loss gradient with respect to the logits."""
    # Arrange
    rng = np.random.default_rng(seed)
    logits = Tensor(rng.normal(scale=3.0, size=(6, 1)))
    labels = rng.integers(0, 2, size=6)

    # Act
    error = gradcheck(lambda: bce_with_logits(logits, labels), [logits], rng=rng)

    # Assert
    assert error < TOLERANCE


def test_row_softmax_rows_sum_to_one(rng):
    """Test softmax rows sum to 1 and masked entries are exactly 0."""
    # Arrange
    x = Tensor(rng.normal(size=(4, 5)))
    mask = rng.random((4, 5)) < 0.6
    mask[:, 0] = True

    # Act
    out = row_softmax(x, mask).data

    # Assert
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(out[~mask] == 0.0)


def test_l2_normalize_zero_row_stays_zero():
    """Test an all-zero row is left at zero with zero gradient."""
    # Arrange
    x = Tensor([[0.0, 0.0], [3.0, 4.0]], requires_grad=True)

    # Act
    with GradTape() as tape:
        out = l2_normalize_rows(x)
        loss = sum_all(out)
    tape.backward(loss)

    # Assert
    assert out.data.tolist() == [[0.0, 0.0], [0.6, 0.8]]
    assert x.grad[0].tolist() == [0.0, 0.0]


def test_pairwise_dot_transpose_is_exact(rng):
    """Test swapping the operands transposes the result bit for bit."""
    # Arrange
    a = Tensor(rng.normal(size=(5, 7)))
    b = Tensor(rng.normal(size=(5, 7)))

    # Act
    ab = pairwise_dot(a, b).data
    ba = pairwise_dot(b, a).data

    # Assert
    assert np.array_equal(ab, ba.T)


def test_bce_is_stable_for_large_logits():
    """Test huge logits produce finite losses."""
    # Act
    loss = bce_with_logits(Tensor([[1000.0], [-1000.0]]), [0, 1])

    # Assert
    assert np.isfinite(loss.item())
    assert loss.item() == pytest.approx(1000.0)


def test_bce_errors():
    """Test empty batches and mismatched shapes are rejected."""
    # Act / Assert
    with pytest.raises(EmptyBatch):
        bce_with_logits(Tensor(np.zeros((0, 1))), [])
    with pytest.raises(ShapeMismatch):
        bce_with_logits(Tensor(np.zeros((3, 1))), [0, 1])


def test_gradients_accumulate_over_reuse():
    """Test a tensor used twice receives the sum of both gradients."""
    # Arrange
    x = Tensor([[2.0]], requires_grad=True)

    # Act
    with GradTape() as tape:
        y = add(mul(x, x), x)
    tape.backward(y)

    # Assert
    assert x.grad.tolist() == [[5.0]]


def test_no_grad_records_nothing():
    """Test operations inside no_grad are not taped."""
    # Arrange
    x = Tensor([[1.0]], requires_grad=True)

    # Act
    with GradTape() as tape:
        with no_grad():
            assert not is_recording()
            mul(x, x)
        assert is_recording()

    # Assert
    assert len(tape) == 0


def test_backward_requires_scalar_root():
    """Test a non-scalar root needs an explicit seed gradient."""
    # Arrange
    x = Tensor(np.ones((2, 2)), requires_grad=True)

    # Act / Assert
    with GradTape() as tape:
        y = scale(x, 2.0)
    with pytest.raises(ShapeMismatch):
        tape.backward(y)
