"""Translation-invariant boundary fields and the fixed-point system.

A boundary field assigns the same positive 2x2 matrix h to every vertex of
a far level, together with a root density omega0 defining the initial
functional rho0(a) = normalized_trace(omega0 · a).  For the state built
from the kernels to be well defined, h must reproduce itself under both
one-step pullbacks:

* tooth (L1):  E(1⊗h) = Tr(h)·1 − sin(2b)·Tr(z h)·z   must equal h,
* spine (L2):  E(1⊗h⊗h) = (tau1·Tr(h)² + tau2·Tr(z h)²)·1
                           + tau3·Tr(h)·Tr(z h)·z      must equal h,

with all traces normalized.  Both residuals are computed by explicit kernel
conjugation and partial trace; the spine residual additionally checks the
closed form above against the matrix route and refuses to continue on
disagreement.

``enumerate_branches`` solves the scalar system exactly: the disordered
branch h = (1/tau1)·1 always solves both equations; an ordered candidate
with Tr(z h) != 0 exists iff tau3 > tau1 but always violates the tooth
equation, so the admissible translation-invariant field is unique (away
from the degenerate couplings flagged by the model parameters).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import comb_graph, op_algebra
from .comb_graph import Vertex
from .ising_kernels import ModelParams, kernel_l1, kernel_l2, vertex_kernel
from .op_algebra import (
    ID2,
    SIGMA_Z,
    LocalOperator,
    identity_on,
    is_hermitian,
    is_positive,
    normalized_trace,
    partial_trace_onto,
    sandwich,
    single_site,
    tensor,
)

__all__ = [
    "BoundaryField",
    "BranchTag",
    "SolutionBranch",
    "map_l1",
    "map_l2",
    "residual_l1",
    "residual_l2",
    "enumerate_branches",
    "iterate_combined",
    "Theorem44Report",
    "check_theorem44",
    "branch_report_json",
]

ADMISSIBILITY_TOL = 1e-10
CLOSED_FORM_TOL = 1e-12


def _as_2x2(h) -> np.ndarray:
    h = np.array(h, dtype=complex)
    if h.shape != (2, 2):
        raise ValueError("boundary matrices are 2x2")
    return h


@dataclass(frozen=True)
class BoundaryField:
    """Per-site boundary matrix h and root density omega0.

    Construction validates that h is Hermitian positive semidefinite, that
    omega0 is Hermitian positive definite, and that the induced functional
    is normalized: rho0(h) = normalized_trace(omega0 · h) = 1.
    """

    h: np.ndarray
    omega0: np.ndarray

    def __post_init__(self):
        h = _as_2x2(self.h)
        omega0 = _as_2x2(self.omega0)
        for name, m in (("h", h), ("omega0", omega0)):
            if np.max(np.abs(m - m.conj().T)) > ADMISSIBILITY_TOL:
                raise ValueError(f"{name} must be Hermitian")
        if np.linalg.eigvalsh(h).min() < -ADMISSIBILITY_TOL:
            raise ValueError("h must be positive semidefinite")
        if np.linalg.eigvalsh(omega0).min() <= 0:
            raise ValueError("omega0 must be positive definite")
        if abs(np.trace(omega0 @ h) / 2 - 1) > ADMISSIBILITY_TOL:
            raise ValueError("rho0(h) must equal 1")
        h.setflags(write=False)
        omega0.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "omega0", omega0)

    def rho0(self, mat2: np.ndarray) -> complex:
        """The initial functional rho0(a) = normalized_trace(omega0 · a)."""
        return complex(np.trace(self.omega0 @ _as_2x2(mat2))) / 2

    @classmethod
    def disordered(cls, params: ModelParams) -> "BoundaryField":
        """The admissible field h = (1/tau1)·1, omega0 = tau1·1."""
        return cls(ID2 / params.tau1, params.tau1 * ID2)

    @classmethod
    def from_h(cls, h) -> "BoundaryField":
        """Field with the scalar root density that normalizes rho0(h) = 1."""
        h = _as_2x2(h)
        t = np.trace(h).real / 2
        if t <= 0:
            raise ValueError("h must have positive normalized trace")
        return cls(h, ID2 / t)


def map_l1(h, beta: float) -> np.ndarray:
    """One-step tooth pullback of 1⊗h, computed with explicit 4x4 matrices."""
    h = _as_2x2(h)
    v = Vertex(0, 1)
    kernel = kernel_l1(beta, v)
    inside = tensor(identity_on([v]), single_site(kernel.support[1], h))
    return partial_trace_onto(sandwich(kernel, inside), [v]).mat


def map_l2(h, params: ModelParams) -> np.ndarray:
    """One-step spine pullback of 1⊗h⊗h via the 8x8 kernel.

    Cross-checked against the closed form
    (tau1 t0² + tau2 t3²)·1 + tau3 t0 t3 · z with t0 = Tr(h), t3 = Tr(z h).
    """
    h = _as_2x2(h)
    v = Vertex(0, 0)
    kernel = kernel_l2(params, v)
    e1, e2 = comb_graph.successors(v)
    inside = tensor(tensor(identity_on([v]), single_site(e1, h)), single_site(e2, h))
    result = partial_trace_onto(sandwich(kernel, inside), [v]).mat

    t0 = np.trace(h) / 2
    t3 = np.trace(SIGMA_Z @ h) / 2
    closed = (params.tau1 * t0**2 + params.tau2 * t3**2) * ID2 \
        + params.tau3 * t0 * t3 * SIGMA_Z
    if np.max(np.abs(result - closed)) > CLOSED_FORM_TOL * max(1.0, float(np.max(np.abs(closed)))):
        raise AssertionError("spine map disagrees with its closed form")
    return result


def residual_l1(h, beta: float) -> np.ndarray:
    """map_l1(h) − h; zero iff h solves the tooth equation."""
    h = _as_2x2(h)
    return map_l1(h, beta) - h


def residual_l2(h, params: ModelParams) -> np.ndarray:
    """map_l2(h) − h; zero iff h solves the spine equation."""
    h = _as_2x2(h)
    return map_l2(h, params) - h


class BranchTag(enum.Enum):
    DISORDERED = "Disordered"
    ORDERED_CANDIDATE = "OrderedCandidate"


@dataclass(frozen=True)
class SolutionBranch:
    """A diagonal solution of the spine scalar system with its diagnostics."""

    tag: BranchTag
    h: np.ndarray
    satisfies_l1: bool
    satisfies_l2: bool
    positive: bool
    residual_norm: float

    @property
    def admissible(self) -> bool:
        return self.satisfies_l1 and self.satisfies_l2 and self.positive

    def to_json(self) -> dict:
        flat = np.asarray(self.h).reshape(-1)
        return {
            "tag": self.tag.value,
            "h": [float(x.real) for x in flat],
            "satisfies_l1": self.satisfies_l1,
            "satisfies_l2": self.satisfies_l2,
            "positive": self.positive,
            "residual_norm": self.residual_norm,
        }


def _diagnose(tag: BranchTag, h: np.ndarray, params: ModelParams) -> SolutionBranch:
    r1 = residual_l1(h, params.beta)
    r2 = residual_l2(h, params)
    n1 = float(np.max(np.abs(r1)))
    n2 = float(np.max(np.abs(r2)))
    # Residuals scale with the field itself (h ~ 1/tau1 shrinks below any
    # fixed absolute tolerance at strong coupling), so test relative to it.
    scale = float(np.max(np.abs(h)))
    op = LocalOperator((Vertex(0, 0),), h)
    return SolutionBranch(
        tag=tag,
        h=h,
        satisfies_l1=n1 <= ADMISSIBILITY_TOL * scale,
        satisfies_l2=n2 <= ADMISSIBILITY_TOL * scale,
        positive=is_positive(op, ADMISSIBILITY_TOL * scale),
        residual_norm=max(n1, n2),
    )


def enumerate_branches(params: ModelParams) -> list[SolutionBranch]:
    """All diagonal solutions of the spine scalar system, with diagnostics.

    Writing t0 = Tr(h), t3 = Tr(z h), the system reads

        t0 = tau1 t0² + tau2 t3²,      t3 = tau3 t0 t3.

    Branch t3 = 0 gives the disordered solution t0 = 1/tau1.  Branch
    t3 != 0 forces t0 = 1/tau3 and t3² = (t0 − tau1 t0²)/tau2, kept only
    when that right side is non-negative (iff tau3 >= tau1); the canonical
    h11 >= h22 representative is emitted (its spin flip solves the system
    too).  Each branch records whether it also satisfies the tooth
    equation and whether it is positive semidefinite.
    """
    branches = [
        _diagnose(BranchTag.DISORDERED, ID2 / params.tau1, params)
    ]
    if params.tau3 > 0 and params.tau2 > 0:
        t0 = 1.0 / params.tau3
        t3_squared = (t0 - params.tau1 * t0 * t0) / params.tau2
        if t3_squared >= 0:
            t3 = math.sqrt(t3_squared)
            h = np.diag([t0 + t3, t0 - t3]).astype(complex)
            branches.append(_diagnose(BranchTag.ORDERED_CANDIDATE, h, params))
    return branches


def iterate_combined(params: ModelParams, h0=None, damping: float = 0.5,
                     tol: float = 1e-12, max_iter: int = 1000):
    """Damped fixed-point iteration for the combined tooth+spine system.

    Cross-check only; the algebraic enumeration is authoritative.  Each
    iterate is renormalized to tau1·Tr(h) = 1 because the raw spine map
    expands the trace direction (multiplier 2 at the fixed point), which no
    positive damping could stabilize on its own.

    Returns (h, iterations, converged).
    """
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    h = ID2 / params.tau1 if h0 is None else _as_2x2(h0).copy()
    for iteration in range(1, max_iter + 1):
        image = map_l1(map_l2(h, params), params.beta)
        t0 = np.trace(image).real / 2
        if t0 <= 0:
            raise ArithmeticError("iteration left the positive cone")
        image = image / (params.tau1 * t0)
        new = (1 - damping) * h + damping * image
        delta = float(np.max(np.abs(new - h)))
        h = new
        if delta <= tol:
            return h, iteration, True
    return h, max_iter, False


@dataclass(frozen=True)
class Theorem44Report:
    """Entrywise residuals of the level compatibility identity E(h_{n+1}) = h_n."""

    beta: float
    J: float
    n_max: int
    residuals: tuple[float, ...]
    rho0_of_h: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.residuals) <= self.tol and abs(self.rho0_of_h - 1) <= self.tol

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "J": self.J,
            "n_max": self.n_max,
            "residuals": list(self.residuals),
            "rho0_of_h": self.rho0_of_h,
            "passed": self.passed,
        }


def check_theorem44(params: ModelParams, n_max: int = 3,
                    field: BoundaryField | None = None,
                    tol: float = ADMISSIBILITY_TOL) -> Theorem44Report:
    """Verify that the layer pullback of h_{n+1} = ⊗h reproduces h_n = ⊗h.

    The layer transition expectation factorizes over the level's vertices;
    each factor is computed by explicit kernel conjugation and partial
    trace, then tensored in level order and compared entrywise to h_n.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if field is None:
        field = BoundaryField.disordered(params)
    h = field.h
    residuals = []
    for n in range(n_max + 1):
        pulled = None
        for x in comb_graph.level(n):
            kernel = vertex_kernel(params, x)
            inside = identity_on([x])
            for y in comb_graph.successors(x):
                inside = tensor(inside, single_site(y, h))
            factor = partial_trace_onto(sandwich(kernel, inside), [x])
            pulled = factor if pulled is None else tensor(pulled, factor)
        target = None
        for x in comb_graph.level(n):
            site = single_site(x, h)
            target = site if target is None else tensor(target, site)
        residuals.append(float(np.max(np.abs(pulled.mat - target.mat))))
    return Theorem44Report(
        beta=params.beta,
        J=params.J,
        n_max=n_max,
        residuals=tuple(residuals),
        rho0_of_h=float(abs(field.rho0(field.h))),
        tol=tol,
    )


def branch_report_json(params: ModelParams, branches: list[SolutionBranch]) -> dict:
    """Wire format of a solve run: couplings plus per-branch diagnostics."""
    return {
        "beta": params.beta,
        "J": params.J,
        "l1_degenerate": params.l1_degenerate,
        "branches": [b.to_json() for b in branches],
    }
