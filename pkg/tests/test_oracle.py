import math

import numpy as np
import pytest

from comb_qmc.boundary_solver import BoundaryField
from comb_qmc.comb_graph import Vertex, volume
from comb_qmc.ising_kernels import model_params
from comb_qmc.op_algebra import ID2, SIGMA_Z, LocalOperator, normalized_trace
from comb_qmc.oracle import FULL_DENSE_MAX_SITES, brute_force_phi, verify_localization
from comb_qmc.qmc_engine import Observable, evaluate_iterative, evaluate_product

BETA2 = math.log(2.0) / 2.0
P2 = model_params(BETA2, 1.0)


def test_identity_is_normalized_on_both_tiers():
    for n in (0, 1, 2):  # full-dense tier, ball of radius n+1 has <= 10 sites
        assert brute_force_phi(Observable.identity(), n, P2) == pytest.approx(1.0, abs=1e-10)
    # 15-site ball runs across the product cut
    assert brute_force_phi(Observable.identity(), 3, P2) == pytest.approx(1.0, abs=1e-10)


def test_free_case_reduces_to_normalized_trace():
    p0 = model_params(0.0, 2.0)
    a = Observable((
        (Vertex(0, 0), np.diag([2.0, 0.0])),
        (Vertex(1, 0), np.diag([1.0, 3.0])),
    ))
    expected = normalized_trace(a.to_local_operator())
    assert brute_force_phi(a, 1, p0) == pytest.approx(expected.real, rel=1e-12)


def test_oracle_matches_engine_routes_small_volume():
    a = Observable.sigma_z_at((0, 0), (2, 0))
    reference = brute_force_phi(a, 2, P2)
    assert evaluate_iterative(a, 2, P2) == pytest.approx(reference, rel=1e-10)
    assert evaluate_product(a, 2, P2) == pytest.approx(reference, rel=1e-10)
    assert reference == pytest.approx((3.0 / 7.0) ** 2, rel=1e-10)


def test_oracle_matches_engine_on_product_cut_tier():
    p = model_params(0.65, 1.3)
    a = Observable.sigma_z_at((0, 0), (3, 0))
    reference = brute_force_phi(a, 3, p)
    assert evaluate_iterative(a, 3, p) == pytest.approx(reference, rel=1e-9)


def test_oracle_accepts_general_local_operator_on_small_tier():
    # An off-diagonal observable has zero expectation: the state is a
    # mixture of diagonal kernels.
    sites = (Vertex(0, 0), Vertex(1, 0))
    raiser = np.array([[0.0, 1.0], [0.0, 0.0]])
    a = LocalOperator(sites, np.kron(raiser, ID2))
    assert brute_force_phi(a, 1, P2) == pytest.approx(0.0, abs=1e-12)

    # Linearity in a non-product combination.
    zz = Observable.sigma_z_at((0, 0), (1, 0)).to_local_operator()
    combo = LocalOperator(sites, 0.5 * np.eye(4) + 0.25 * zz.mat)
    expected = 0.5 + 0.25 * brute_force_phi(Observable.sigma_z_at((0, 0), (1, 0)), 1, P2)
    assert brute_force_phi(combo, 1, P2) == pytest.approx(expected, rel=1e-11)


def test_general_operators_rejected_beyond_dense_tier():
    sites = tuple(volume(1))
    op = LocalOperator(sites, np.eye(8) + 0.0j)
    with pytest.raises(ValueError, match="only product observables"):
        brute_force_phi(op, 3, P2)


def test_volume_caps():
    with pytest.raises(ValueError, match="oracle volume too large"):
        brute_force_phi(Observable.identity(), 4, P2)
    with pytest.raises(ValueError, match="oracle volume too large"):
        brute_force_phi(Observable.identity(), 3, P2, max_sites=10)


def test_site_cap_env_override(monkeypatch):
    monkeypatch.setenv("COMB_QMC_MAX_SITES", "6")
    with pytest.raises(ValueError, match="oracle volume too large"):
        brute_force_phi(Observable.identity(), 2, P2)
    monkeypatch.setenv("COMB_QMC_MAX_SITES", "21")
    # raising the cap admits the 21-site ball in principle; the call is
    # not executed here because the product-cut tier would still build
    # 13-site layer operators.


def test_support_must_fit_in_ball():
    with pytest.raises(ValueError, match="exceeds the ball"):
        brute_force_phi(Observable.sigma_z_at((3, 0)), 2, P2)


def test_explicit_field_reproduces_disordered_default():
    a = Observable.sigma_z_at((0, 0), (1, 0))
    field = BoundaryField.disordered(P2)
    assert brute_force_phi(a, 1, P2, field=field) == pytest.approx(
        brute_force_phi(a, 1, P2), rel=1e-13)


def test_layer_localization():
    for n in (0, 1, 2):
        gap = verify_localization(n, P2, n_samples=4)
        assert gap < 1e-12
    assert FULL_DENSE_MAX_SITES == 10
