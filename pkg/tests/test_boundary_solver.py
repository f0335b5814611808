import math

import numpy as np
import pytest

from comb_qmc.boundary_solver import (
    BoundaryField,
    BranchTag,
    check_theorem44,
    enumerate_branches,
    iterate_combined,
    map_l1,
    map_l2,
    residual_l1,
    residual_l2,
)
from comb_qmc.ising_kernels import model_params
from comb_qmc.op_algebra import ID2

BETA2 = math.log(2.0) / 2.0
BETA3 = math.log(3.0) / 2.0


def test_tooth_map_at_zero_coupling_averages_the_diagonal():
    # At beta = 0 the tooth map is h -> Tr(h) 1.
    h = np.diag([2.0, 1.0]).astype(complex)
    out = map_l1(h, 0.0)
    np.testing.assert_allclose(out, 1.5 * ID2, atol=1e-15)
    np.testing.assert_allclose(residual_l1(h, 0.0), np.diag([-0.5, 0.5]), atol=1e-15)


def test_tooth_map_kills_off_diagonal_entries():
    h = np.array([[1.0, 0.25], [0.25, 1.0]], dtype=complex)
    out = map_l1(h, 0.9)
    assert out[0, 1] == pytest.approx(0.0, abs=1e-14)
    assert out[1, 0] == pytest.approx(0.0, abs=1e-14)


def test_tooth_map_general_formula():
    # h -> Tr(h) 1 - sin(2 beta) Tr(z h) z on random Hermitian h.
    rng = np.random.default_rng(5)
    for beta in (0.2, 0.8, 1.5):
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        h = (m + m.conj().T) / 2
        t0 = np.trace(h).real / 2
        t3 = np.trace(np.diag([1.0, -1.0]) @ h).real / 2
        expected = t0 * ID2 - math.sin(2 * beta) * t3 * np.diag([1.0, -1.0])
        np.testing.assert_allclose(map_l1(h, beta), expected, atol=1e-13)


def test_spine_map_on_identity_scales_by_tau1():
    p = model_params(BETA2, 1.0)
    out = map_l2(ID2.astype(complex), p)
    np.testing.assert_allclose(out, p.tau1 * ID2, atol=1e-12)
    np.testing.assert_allclose(residual_l2(ID2, p), (p.tau1 - 1) * ID2, atol=1e-12)


def test_spine_map_scalar_form():
    p = model_params(0.7, 1.8)
    h = np.diag([0.4, 0.1]).astype(complex)
    t0, t3 = 0.25, 0.15
    expected = (p.tau1 * t0**2 + p.tau2 * t3**2) * ID2 \
        + p.tau3 * t0 * t3 * np.diag([1.0, -1.0])
    np.testing.assert_allclose(map_l2(h, p), expected, atol=1e-12)


def test_disordered_branch_theta_two():
    p = model_params(BETA2, 1.0)
    branches = enumerate_branches(p)
    assert branches[0].tag is BranchTag.DISORDERED
    np.testing.assert_allclose(branches[0].h, (2.0 / 7.0) * ID2, atol=1e-14)
    assert branches[0].admissible
    # tau3 < tau1 here, so no ordered candidate exists.
    assert len(branches) == 1


def test_ordered_candidate_theta_three():
    p = model_params(BETA3, 1.0)
    branches = enumerate_branches(p)
    assert len(branches) == 2
    ordered = branches[1]
    assert ordered.tag is BranchTag.ORDERED_CANDIDATE
    hi = 1.0 / 12.0 + 1.0 / (12.0 * math.sqrt(2.0))
    lo = 1.0 / 12.0 - 1.0 / (12.0 * math.sqrt(2.0))
    np.testing.assert_allclose(np.diag(ordered.h).real, [hi, lo], atol=1e-14)
    assert ordered.satisfies_l2
    assert ordered.positive
    assert not ordered.satisfies_l1
    assert not ordered.admissible


def test_ordered_candidate_exists_iff_tau3_at_least_tau1():
    for beta in np.linspace(0.05, 2.0, 14):
        for J in (0.1, 0.5, 1.0, 2.0, 4.0):
            p = model_params(float(beta), float(J))
            branches = enumerate_branches(p)
            exists = len(branches) == 2
            assert exists == (p.tau3 >= p.tau1 and p.tau2 > 0)


def test_admissible_solution_is_always_the_disordered_field():
    # At tau3 = tau1 the ordered candidate merges into the disordered
    # solution, so uniqueness is asserted on the field, not the tag count.
    for beta in (0.0, 0.3, BETA3, 1.2, 1.9):
        for J in (0.0, 1.0, 3.0):
            p = model_params(beta, J)
            admissible = [b for b in enumerate_branches(p) if b.admissible]
            assert len(admissible) >= 1
            for b in admissible:
                np.testing.assert_allclose(b.h, ID2 / p.tau1, atol=1e-8 / p.tau1)


def test_branch_json_shape():
    p = model_params(BETA3, 1.0)
    data = enumerate_branches(p)[1].to_json()
    assert set(data) == {"tag", "h", "satisfies_l1", "satisfies_l2",
                         "positive", "residual_norm"}
    assert data["tag"] == "OrderedCandidate"
    assert len(data["h"]) == 4


def test_boundary_field_validation():
    p = model_params(0.5, 1.0)
    field = BoundaryField.disordered(p)
    np.testing.assert_allclose(field.h, ID2 / p.tau1, atol=1e-15)
    assert field.rho0(field.h) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        BoundaryField(np.diag([1.0, -0.1]).astype(complex), ID2.astype(complex))


def test_boundary_field_from_h_normalizes():
    h = np.diag([0.8, 0.2]).astype(complex)
    field = BoundaryField.from_h(h)
    # omega0 = 1 / Tr_n(h) makes rho0(h) = 1
    assert field.rho0(h) == pytest.approx(1.0, rel=1e-14)


def test_iterate_combined_converges_to_disordered_solution():
    for beta, J in ((0.3, 1.0), (BETA3, 1.0), (1.1, 2.0)):
        p = model_params(beta, J)
        h, iterations, converged = iterate_combined(p)
        assert converged
        np.testing.assert_allclose(h, ID2 / p.tau1, atol=1e-10 / p.tau1)
        assert iterations >= 1


def test_iterate_combined_from_asymmetric_start():
    p = model_params(0.6, 1.5)
    h0 = np.diag([0.9, 0.1]).astype(complex)
    h, _, converged = iterate_combined(p, h0=h0)
    assert converged
    np.testing.assert_allclose(h, ID2 / p.tau1, atol=1e-9)


def test_level_compatibility_with_solved_field():
    p = model_params(0.5, 1.0)
    report = check_theorem44(p, n_max=2)
    assert report.passed
    assert max(report.residuals) < 1e-10
    assert report.rho0_of_h == pytest.approx(1.0, abs=1e-12)


def test_level_compatibility_flags_wrong_boundary_field():
    # h = 1 without renormalization leaves a tau1-sized defect at n = 0.
    p = model_params(BETA2, 1.0)
    bad = BoundaryField(ID2.astype(complex), ID2.astype(complex))
    report = check_theorem44(p, n_max=1, field=bad)
    assert not report.passed
    assert max(report.residuals) == pytest.approx(p.tau1 - 1.0, rel=1e-10)
