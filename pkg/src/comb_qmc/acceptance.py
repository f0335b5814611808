"""The acceptance battery: every release gate as a callable criterion.

Each criterion returns a :class:`CriterionResult` with its pass/fail
verdict, measured runtime against the budgeted limit, and a one-line
detail.  ``run_all`` executes the full battery in order; the ``verify``
CLI command and the acceptance test module both drive these functions, so
the gate is identical everywhere.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import comb_graph, oracle
from .boundary_solver import (
    BoundaryField,
    BranchTag,
    check_theorem44,
    enumerate_branches,
    residual_l1,
    residual_l2,
)
from .ising_kernels import kernel_l1, model_params, spine_kernel_route_gap
from .op_algebra import ID2, SIGMA_Z, LocalOperator, partial_trace_onto, sandwich
from .qmc_engine import (
    Observable,
    check_compatibility,
    clustering_report,
    evaluate_iterative,
    evaluate_product,
    two_point,
)

__all__ = ["CriterionResult", "run_all", "CRITERIA"]

GRID_BETAS = tuple(round(0.1 * i, 10) for i in range(1, 21))
GRID_JS = tuple(0.25 * i for i in range(1, 17))

#: Five (beta, J) points for the compatibility-identity criterion.
THEOREM44_POINTS = ((0.1, 0.25), (0.5, 1.0), (1.0, 2.0), (1.5, 0.75), (2.0, 4.0))

#: The two coupling points of the route-equivalence battery.
ROUTE_POINTS = ((math.log(2) / 2, 1.0), (math.log(3) / 2, 2.0))

BATTERY_SEED = 20260814


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    runtime: float
    limit: float | None
    detail: str

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        budget = f"/{self.limit:g}s" if self.limit is not None else ""
        return f"{verdict} {self.name} ({self.runtime:.2f}s{budget}): {self.detail}"


def _finish(name: str, start: float, limit: float | None, ok: bool,
            detail: str) -> CriterionResult:
    runtime = time.perf_counter() - start
    if limit is not None and runtime > limit:
        ok = False
        detail += f"; runtime {runtime:.2f}s exceeded {limit:g}s"
    return CriterionResult(name, ok, runtime, limit, detail)


def _grid():
    for beta in GRID_BETAS:
        for j in GRID_JS:
            yield beta, j


def criterion_1_coefficients() -> CriterionResult:
    """Polynomial and closed-form model scalars agree on the coupling grid."""
    start = time.perf_counter()
    worst = 0.0
    for beta, j in _grid():
        p = model_params(beta, j)  # raises if the two routes disagree
        worst = max(worst, abs(p.tau1 * p.alpha - 1.0))
        if not (0 <= p.rate_paper <= 0.5 and 0 <= p.rate_direct < 1):
            return _finish("coefficient-identities", start, 1.0, False,
                           f"rate out of range at beta={beta}, J={j}")
    return _finish("coefficient-identities", start, 1.0, True,
                   f"320 grid points, worst alpha*tau1 gap {worst:.2e}")


def criterion_2_kernels() -> CriterionResult:
    """Kernel route agreement and the tooth conditional-density identity."""
    start = time.perf_counter()
    worst_gap = 0.0
    worst_cd = 0.0
    for beta, j in _grid():
        p = model_params(beta, j)
        worst_gap = max(worst_gap, spine_kernel_route_gap(p))
        k = kernel_l1(beta)
        dim = np.eye(4, dtype=complex)
        squared = sandwich(k, LocalOperator(k.support, dim))
        onto = partial_trace_onto(squared, [k.support[0]])
        worst_cd = max(worst_cd, float(np.max(np.abs(onto.mat - ID2))))
    ok = worst_gap <= 1e-12 and worst_cd <= 1e-12
    return _finish("kernel-construction", start, 1.0, ok,
                   f"route gap {worst_gap:.2e}, conditional-density gap {worst_cd:.2e}")


def criterion_3_fixed_point() -> CriterionResult:
    """The disordered field solves both equations; it is the unique admissible one."""
    start = time.perf_counter()
    worst = 0.0
    for beta, j in _grid():
        p = model_params(beta, j)
        h = ID2 / p.tau1
        worst = max(worst,
                    float(np.max(np.abs(residual_l1(h, beta)))),
                    float(np.max(np.abs(residual_l2(h, p)))))
        branches = enumerate_branches(p)
        admissible = [b for b in branches if b.admissible]
        if len(admissible) != 1 or admissible[0].tag is not BranchTag.DISORDERED:
            return _finish("fixed-point-solutions", start, 5.0, False,
                           f"admissible set wrong at beta={beta}, J={j}")
    ok = worst <= 1e-12
    return _finish("fixed-point-solutions", start, 5.0, ok,
                   f"unique disordered solution on 320 points, worst residual {worst:.2e}")


def criterion_4_ordered_branch() -> CriterionResult:
    """Ordered candidate appears iff tau3 > tau1 and always fails the tooth equation."""
    start = time.perf_counter()
    p3 = model_params(math.log(3) / 2, 1.0)
    branches3 = enumerate_branches(p3)
    ordered = [b for b in branches3 if b.tag is BranchTag.ORDERED_CANDIDATE]
    checks = (
        len(ordered) == 1
        and ordered[0].positive
        and ordered[0].satisfies_l2
        and not ordered[0].satisfies_l1
        and not ordered[0].admissible
    )
    expected = np.diag([1 / 12 + 1 / (12 * math.sqrt(2)), 1 / 12 - 1 / (12 * math.sqrt(2))])
    if ordered:
        checks = checks and float(np.max(np.abs(ordered[0].h - expected))) <= 1e-10
    p2 = model_params(math.log(2) / 2, 1.0)
    branches2 = enumerate_branches(p2)
    checks = checks and all(b.tag is BranchTag.DISORDERED for b in branches2)
    return _finish("ordered-branch-logic", start, 1.0, bool(checks),
                   "theta=3 candidate rejected by tooth equation; theta=2 has none")


def criterion_5_level_compatibility() -> CriterionResult:
    """E(h_{n+1}) = h_n entrywise for n <= 3 at five coupling points."""
    start = time.perf_counter()
    worst = 0.0
    for beta, j in THEOREM44_POINTS:
        report = check_theorem44(model_params(beta, j), n_max=3)
        worst = max(worst, max(report.residuals), abs(report.rho0_of_h - 1))
        if not report.passed:
            return _finish("level-compatibility", start, 30.0, False,
                           f"failed at beta={beta}, J={j}: residuals {report.residuals}")
    return _finish("level-compatibility", start, 30.0, True,
                   f"5 points, n<=3, worst residual {worst:.2e}")


def _random_diag(rng) -> np.ndarray:
    return np.diag(rng.standard_normal(2) + 1j * rng.standard_normal(2))


def _random_general(rng) -> np.ndarray:
    return rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))


def _random_observables(rng, sites, count, factory) -> list[Observable]:
    observables = []
    for _ in range(count):
        size = int(rng.integers(1, min(4, len(sites)) + 1))
        chosen = rng.choice(len(sites), size=size, replace=False)
        observables.append(Observable(tuple(
            (sites[int(i)], factory(rng)) for i in chosen
        )))
    return observables


def route_battery(seed: int = BATTERY_SEED):
    """The route-equivalence battery: (label, params, n, observables)."""
    rng = np.random.default_rng(seed)
    volume2 = comb_graph.volume(2)
    volume3 = comb_graph.volume(3)
    batches = []
    for beta, j in ROUTE_POINTS:
        p = model_params(beta, j)
        on_l2 = (_random_observables(rng, volume2, 50, _random_diag)
                 + _random_observables(rng, volume2, 20, _random_general))
        on_l3 = (_random_observables(rng, volume3, 5, _random_diag)
                 + _random_observables(rng, volume3, 5, _random_general))
        batches.append((f"beta={beta:.4f},J={j}", p, 2, on_l2))
        batches.append((f"beta={beta:.4f},J={j}", p, 3, on_l3))
    return batches


def criterion_6_route_equivalence(max_n: int = 3) -> CriterionResult:
    """Iterative, product, and oracle values agree to relative 1e-10."""
    start = time.perf_counter()
    worst = 0.0
    total = 0
    for label, p, n, observables in route_battery():
        if n > max_n:
            continue
        for a in observables:
            vi = evaluate_iterative(a, n, p)
            vp = evaluate_product(a, n, p)
            vo = oracle.brute_force_phi(a, n, p)
            scale = 1 + abs(vi)
            gap = max(abs(vi - vp), abs(vi - vo)) / scale
            worst = max(worst, gap)
            total += 1
            if gap > 1e-10:
                return _finish("route-equivalence", start, 600.0, False,
                               f"routes disagree ({gap:.2e}) at {label}, n={n}")
    return _finish("route-equivalence", start, 600.0, True,
                   f"{total} observables, worst relative gap {worst:.2e}")


def criterion_7_state_properties() -> CriterionResult:
    """Normalization, positivity, and zero magnetization."""
    start = time.perf_counter()
    rng = np.random.default_rng(BATTERY_SEED + 1)
    worst_norm = 0.0
    worst_pos = 0.0
    worst_mag = 0.0
    for beta, j in ROUTE_POINTS:
        p = model_params(beta, j)
        for n in range(4):
            worst_norm = max(worst_norm,
                             abs(evaluate_iterative(Observable.identity(), n, p) - 1))
        for n in range(1, 5):
            worst_norm = max(worst_norm,
                             abs(evaluate_product(Observable.identity(), n, p) - 1))
        for a in _random_observables(rng, comb_graph.volume(2), 20, _random_general):
            value = evaluate_iterative(a.adjoint_times_self(), 2, p)
            worst_pos = max(worst_pos, -value.real, abs(value.imag))
        for u in comb_graph.volume(3):
            value = evaluate_iterative(Observable.sigma_z_at(u), 3, p)
            worst_mag = max(worst_mag, abs(value))
    ok = worst_norm <= 1e-12 and worst_pos <= 1e-10 and worst_mag <= 1e-10
    return _finish("state-properties", start, None, ok,
                   f"norm gap {worst_norm:.2e}, positivity floor {worst_pos:.2e}, "
                   f"magnetization {worst_mag:.2e}")


def criterion_8_compatibility() -> CriterionResult:
    """phi_{n+1} = phi_n with the solved field; detectably broken with h = 1."""
    start = time.perf_counter()
    rng = np.random.default_rng(BATTERY_SEED + 2)
    worst = 0.0
    for beta, j in ROUTE_POINTS:
        p = model_params(beta, j)
        observables = (_random_observables(rng, comb_graph.volume(2), 10, _random_diag)
                       + _random_observables(rng, comb_graph.volume(2), 10, _random_general))
        for a in observables:
            worst = max(worst, check_compatibility(a, 2, p))
    p2 = model_params(math.log(2) / 2, 1.0)
    broken = check_compatibility(Observable.identity(), 2, p2,
                                 field=BoundaryField.from_h(ID2))
    ok = worst <= 1e-10 and broken > 1e-2
    return _finish("projective-compatibility", start, None, ok,
                   f"worst gap {worst:.2e} with solved field; {broken:.2e} with h=1")


def criterion_9_clustering() -> CriterionResult:
    """Spine defects decay geometrically; the same closed form matches everywhere."""
    start = time.perf_counter()
    winners = set()
    worst_spread = 0.0
    for theta in (1.5, 2.0, 3.0):
        for j in (0.5, 1.0, 2.0):
            p = model_params(math.log(theta) / 2, j)
            report = clustering_report(p, d_max=6)
            if report.undefined_zero:
                return _finish("clustering-rate", start, 300.0, False,
                               f"unexpected zero defects at theta={theta}, J={j}")
            worst_spread = max(worst_spread, report.spread)
            if report.lambda_star >= 1 or report.matched_candidate is None:
                return _finish("clustering-rate", start, 300.0, False,
                               f"no candidate matched at theta={theta}, J={j} "
                               f"(lambda*={report.lambda_star})")
            winners.add(report.matched_candidate)
    ok = len(winners) == 1 and worst_spread <= 1e-8
    return _finish("clustering-rate", start, 300.0, ok,
                   f"9 points, ratio spread {worst_spread:.2e}, "
                   f"winner {sorted(winners)}")


def criterion_10_tooth_decay(max_n: int = 3) -> CriterionResult:
    """Tooth correlations scale by -sin(2 beta) per step, confirmed by the oracle."""
    start = time.perf_counter()
    worst_ratio = 0.0
    worst_oracle = 0.0
    heights = tuple(range(1, max(2, min(3, max_n)) + 1))
    for beta, j in ROUTE_POINTS:
        p = model_params(beta, j)
        values = []
        for tooth_l in heights:
            value = two_point(SIGMA_Z, SIGMA_Z, (0, 0), (0, tooth_l), p)
            reference = oracle.brute_force_phi(
                Observable.sigma_z_at((0, 0), (0, tooth_l)), tooth_l, p)
            worst_oracle = max(worst_oracle,
                               abs(value - reference) / (1 + abs(value)))
            values.append(value)
        for lo, hi in zip(values, values[1:]):
            worst_ratio = max(worst_ratio, abs(hi / lo - p.tooth_rate))
    ok = worst_ratio <= 1e-8 and worst_oracle <= 1e-10
    return _finish("tooth-decay", start, None, ok,
                   f"ratio gap {worst_ratio:.2e}, oracle gap {worst_oracle:.2e}")


CRITERIA = (
    criterion_1_coefficients,
    criterion_2_kernels,
    criterion_3_fixed_point,
    criterion_4_ordered_branch,
    criterion_5_level_compatibility,
    criterion_6_route_equivalence,
    criterion_7_state_properties,
    criterion_8_compatibility,
    criterion_9_clustering,
    criterion_10_tooth_decay,
)


def run_all(max_n: int = 3) -> list[CriterionResult]:
    """Run the whole battery; ``max_n`` caps the deepest volume exercised.

    The full gate requires max_n >= 3; smaller values thin the
    route-equivalence and tooth batteries for quick smoke runs.
    """
    results = []
    for criterion in CRITERIA:
        if criterion in (criterion_6_route_equivalence, criterion_10_tooth_decay):
            results.append(criterion(max_n=max_n))
        else:
            results.append(criterion())
    return results
