import numpy as np
import pytest

from comb_qmc.comb_graph import Vertex
from comb_qmc.op_algebra import (
    ID2,
    SIGMA_Z,
    LocalOperator,
    compose,
    embed,
    identity_on,
    is_hermitian,
    is_positive,
    normalized_trace,
    partial_trace_onto,
    psd_sqrt,
    raw_trace,
    sandwich,
    single_site,
    tensor,
)

A = Vertex(0, 0)
B = Vertex(1, 0)
C = Vertex(0, 1)

RNG = np.random.default_rng(987)


def random_op(support):
    d = 2 ** len(support)
    m = RNG.standard_normal((d, d)) + 1j * RNG.standard_normal((d, d))
    return LocalOperator(tuple(support), m)


def test_constructor_validations():
    with pytest.raises(ValueError, match="support collision"):
        LocalOperator((A, A), np.eye(4))
    with pytest.raises(ValueError):
        LocalOperator((A,), np.eye(4))


def test_matrix_is_read_only():
    op = single_site(A, ID2)
    with pytest.raises(ValueError):
        op.mat[0, 0] = 5.0


def test_normalized_trace_is_matrix_trace_over_dimension():
    op = single_site(A, np.diag([3.0, 1.0]))
    assert normalized_trace(op) == pytest.approx(2.0)
    assert raw_trace(op) == pytest.approx(4.0)
    two = tensor(op, single_site(B, np.diag([1.0, 0.0])))
    assert normalized_trace(two) == pytest.approx(1.0)
    assert normalized_trace(identity_on([A, B, C])) == pytest.approx(1.0)


def test_tensor_concatenates_support_and_rejects_overlap():
    op = tensor(single_site(B, SIGMA_Z), single_site(A, ID2))
    assert op.support == (B, A)
    np.testing.assert_allclose(op.mat, np.kron(SIGMA_Z, ID2))
    with pytest.raises(ValueError, match="support collision"):
        tensor(single_site(A, ID2), single_site(A, ID2))


def test_embed_pads_with_identity():
    op = embed(single_site(B, SIGMA_Z), [A, B])
    np.testing.assert_allclose(op.mat, np.kron(ID2, SIGMA_Z))
    with pytest.raises(ValueError, match="support not contained"):
        embed(single_site(C, ID2), [A, B])


def test_embed_then_trace_returns_original():
    op = random_op([B])
    back = partial_trace_onto(embed(op, [A, B, C]), [B])
    assert back.support == (B,)
    np.testing.assert_allclose(back.mat, op.mat, atol=1e-14)


def test_partial_trace_normalization():
    # Tracing out one site of a two-site identity keeps a unit trace.
    full = identity_on([A, B])
    red = partial_trace_onto(full, [A])
    np.testing.assert_allclose(red.mat, ID2)

    zz = tensor(single_site(A, SIGMA_Z), single_site(B, SIGMA_Z))
    red = partial_trace_onto(zz, [A])
    np.testing.assert_allclose(red.mat, np.zeros((2, 2)), atol=1e-15)


def test_partial_trace_frozen_example():
    m = np.arange(16, dtype=float).reshape(4, 4)
    op = LocalOperator((A, B), m)
    onto_first = partial_trace_onto(op, [A])
    # Half-weighted block traces of [[0..3],[4..7],[8..11],[12..15]].
    np.testing.assert_allclose(onto_first.mat, np.array([[2.5, 4.5], [10.5, 12.5]]))
    onto_second = partial_trace_onto(op, [B])
    np.testing.assert_allclose(onto_second.mat, np.array([[5.0, 6.0], [9.0, 10.0]]))


def test_compose_aligns_supports():
    left = single_site(A, SIGMA_Z)
    right = tensor(single_site(A, SIGMA_Z), single_site(B, SIGMA_Z))
    product = compose(left, right)
    assert product.support == (A, B)
    # (z ox 1)(z ox z) = 1 ox z
    np.testing.assert_allclose(product.mat, np.kron(ID2, SIGMA_Z))


def test_sandwich_requires_matching_support():
    k = random_op([A, B])
    a = random_op([A, B])
    out = sandwich(k, a)
    np.testing.assert_allclose(out.mat, k.mat.conj().T @ a.mat @ k.mat)
    with pytest.raises(ValueError, match="support mismatch"):
        sandwich(k, random_op([A, C]))


def test_sandwich_preserves_positivity():
    k = random_op([A, B])
    m = RNG.standard_normal((4, 4)) + 1j * RNG.standard_normal((4, 4))
    rho = LocalOperator((A, B), m @ m.conj().T)
    assert is_positive(sandwich(k, rho), tol=1e-10)


def test_hermiticity_and_positivity_checks():
    assert is_hermitian(single_site(A, SIGMA_Z))
    assert not is_hermitian(single_site(A, np.array([[0, 1], [0, 0]])))
    assert is_positive(single_site(A, np.diag([0.5, 0.0])))
    assert not is_positive(single_site(A, np.diag([0.5, -0.2])))
    with pytest.raises(ValueError, match="non-Hermitian"):
        is_positive(single_site(A, np.array([[0, 1], [0, 0]])))


def test_psd_sqrt_squares_back():
    m = RNG.standard_normal((4, 4)) + 1j * RNG.standard_normal((4, 4))
    p = m @ m.conj().T
    r = psd_sqrt(p)
    np.testing.assert_allclose(r @ r, p, atol=1e-10)
    np.testing.assert_allclose(r, r.conj().T, atol=1e-12)


def test_json_round_trip():
    op = random_op([A, C])
    data = op.to_json()
    assert data["support"] == [[0, 0], [0, 1]]
    back = LocalOperator.from_json(data)
    assert back.support == op.support
    np.testing.assert_allclose(back.mat, op.mat)
