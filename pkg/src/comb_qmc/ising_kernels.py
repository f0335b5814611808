"""Ising interaction kernels on comb edges and the derived model scalars.

The model attaches to every oriented edge the operator exp(beta*H) with
H = (1 + sigma_z ⊗ sigma_z)/2, using coupling beta along tooth and spine
edges and J*beta across the transverse spine pair.  A tooth vertex carries
the 4x4 kernel

    K1 = cos(beta)·1⊗1 − sin(beta)·sigma_z⊗sigma_z,

a spine vertex the 8x8 product of its three edge exponentials on
(v, v+e1, v+e2), which collapses to the closed form

    K2 = A·111 + B·zz1 + B·z1z + C·1zz,

with A, B, C polynomial in K0 = (e^b+1)/2, K3 = (e^b-1)/2 and the
transverse pair R0, R3 built from e^{Jb}.  ``model_params`` evaluates both
the polynomial route and the theta = e^{2b} closed forms for the scalars

    tau1 = A² + 2B² + C²,  tau2 = 2(AC + B²),  tau3 = 4B(A + C),

and refuses to continue if the two routes disagree.  All kernels are real
diagonal matrices; ``layer_kernel`` tensors them across one level in the
canonical successor order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.linalg import expm

from . import comb_graph, op_algebra
from .comb_graph import Vertex, as_vertex, successors
from .op_algebra import ID2, SIGMA_Z, LocalOperator

__all__ = [
    "ModelParams",
    "model_params",
    "kernel_l1",
    "kernel_l2",
    "vertex_kernel",
    "layer_kernel",
    "layer_kernel_diagonal",
    "spine_kernel_route_gap",
]

#: Relative agreement demanded between the polynomial and closed-form scalars
#: and between the exponential and closed-form kernel routes.
ROUTE_AGREEMENT_RTOL = 1e-12

DEFAULT_MAX_LAYER_LEVEL = 6


@dataclass(frozen=True)
class ModelParams:
    """Couplings plus every derived scalar of the comb Ising model.

    rate_paper and rate_direct are the two candidate spine-correlation
    decay rates tau3/(4*tau1) and tau3/(2*tau1); which one the state
    realizes is decided numerically by the clustering report, not here.
    tooth_rate = -sin(2*beta) is the per-step tooth decay factor.
    """

    beta: float
    J: float
    theta: float
    K0: float
    K3: float
    R0: float
    R3: float
    A: float
    B: float
    C: float
    tau1: float
    tau2: float
    tau3: float
    alpha: float
    rate_paper: float
    rate_direct: float
    tooth_rate: float
    l1_degenerate: bool

    CSV_COLUMNS = (
        "beta", "J", "theta", "K0", "K3", "R0", "R3", "A", "B", "C",
        "tau1", "tau2", "tau3", "alpha", "rate_paper", "rate_direct",
    )

    def to_json(self) -> dict:
        data = asdict(self)
        data["l1_degenerate"] = bool(self.l1_degenerate)
        return data

    def csv_row(self) -> list[float]:
        return [getattr(self, c) for c in self.CSV_COLUMNS]


def model_params(beta: float, J: float) -> ModelParams:
    """Evaluate all model scalars at couplings (beta, J).

    beta = 0 is accepted as a degenerate test case (all kernels become the
    identity); negative couplings are rejected.
    """
    beta = float(beta)
    J = float(J)
    if not (math.isfinite(beta) and math.isfinite(J)) or beta < 0 or J < 0:
        raise ValueError("parameters out of model range")

    eb = math.exp(beta)
    ejb = math.exp(J * beta)
    K0, K3 = (eb + 1) / 2, (eb - 1) / 2
    R0, R3 = (ejb + 1) / 2, (ejb - 1) / 2
    A = K0 * K0 * R0 + K3 * K3 * R3
    B = K0 * K3 * (R0 + R3)
    C = K0 * K0 * R3 + K3 * K3 * R0

    tau1 = A * A + 2 * B * B + C * C
    tau2 = 2 * (A * C + B * B)
    tau3 = 4 * B * (A + C)

    theta = math.exp(2 * beta)
    theta_j = theta**J
    tau1_closed = (theta_j * (theta**2 + 1) + 2 * theta) / 4
    tau2_closed = (theta_j * (theta**2 + 1) - 2 * theta) / 4
    tau3_closed = theta_j * (theta**2 - 1) / 2
    for direct, closed in ((tau1, tau1_closed), (tau2, tau2_closed), (tau3, tau3_closed)):
        if abs(direct - closed) > ROUTE_AGREEMENT_RTOL * max(1.0, abs(closed)):
            raise AssertionError(
                f"tau routes disagree: {direct!r} vs {closed!r} at beta={beta}, J={J}"
            )

    sin2b = math.sin(2 * beta)
    return ModelParams(
        beta=beta,
        J=J,
        theta=theta,
        K0=K0,
        K3=K3,
        R0=R0,
        R3=R3,
        A=A,
        B=B,
        C=C,
        tau1=tau1,
        tau2=tau2,
        tau3=tau3,
        alpha=1.0 / tau1,
        rate_paper=tau3 / (4 * tau1),
        rate_direct=tau3 / (2 * tau1),
        tooth_rate=-sin2b,
        l1_degenerate=abs(sin2b + 1.0) < 1e-12,
    )


def kernel_l1(beta: float, v=Vertex(0, 1)) -> LocalOperator:
    """Tooth kernel cos(beta)·1⊗1 − sin(beta)·z⊗z on (v, v+e2).

    Squares to 1 − sin(2beta)·z⊗z, so its normalized partial trace onto the
    first site is exactly the identity: the kernel is a conditional density.
    """
    v = as_vertex(v)
    mat = math.cos(beta) * np.kron(ID2, ID2) - math.sin(beta) * np.kron(SIGMA_Z, SIGMA_Z)
    return LocalOperator((v, Vertex(v.k, v.l + 1)), mat)


def _edge_exponent(beta: float, slot_a: int, slot_b: int) -> np.ndarray:
    """8x8 exponential exp(beta (1 + z_a z_b)/2) acting on slots of 3 sites."""
    paulis = [ID2, ID2, ID2]
    paulis[slot_a] = SIGMA_Z
    paulis[slot_b] = SIGMA_Z
    zz = np.kron(np.kron(paulis[0], paulis[1]), paulis[2])
    h = (np.eye(8, dtype=complex) + zz) / 2
    return expm(beta * h)


def _spine_kernel_routes(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """The 8x8 spine kernel by matrix exponentials and by the closed form."""
    exponential = (
        _edge_exponent(params.beta, 0, 1)
        @ _edge_exponent(params.beta, 0, 2)
        @ _edge_exponent(params.J * params.beta, 1, 2)
    )
    one = np.kron(np.kron(ID2, ID2), ID2)
    zz1 = np.kron(np.kron(SIGMA_Z, SIGMA_Z), ID2)
    z1z = np.kron(np.kron(SIGMA_Z, ID2), SIGMA_Z)
    onezz = np.kron(np.kron(ID2, SIGMA_Z), SIGMA_Z)
    closed = params.A * one + params.B * zz1 + params.B * z1z + params.C * onezz
    return exponential, closed


def spine_kernel_route_gap(params: ModelParams) -> float:
    """Entrywise gap between the two spine-kernel routes, relative to scale."""
    exponential, closed = _spine_kernel_routes(params)
    scale = max(1.0, float(np.max(np.abs(closed))))
    return float(np.max(np.abs(exponential - closed))) / scale


def kernel_l2(params: ModelParams, v=Vertex(0, 0)) -> LocalOperator:
    """Spine kernel on (v, v+e1, v+e2) for a spine vertex v.

    Built twice: as the product of the three edge exponentials
    exp(bH_{v,e1})·exp(bH_{v,e2})·exp(JbH_{e1,e2}) and as the closed form
    A·111 + B·zz1 + B·z1z + C·1zz; the two must agree entrywise to
    ``ROUTE_AGREEMENT_RTOL`` relative to the largest entry.
    """
    v = as_vertex(v)
    if v.l != 0:
        raise ValueError("spine kernel requires a spine vertex (l = 0)")
    exponential, closed = _spine_kernel_routes(params)
    scale = max(1.0, float(np.max(np.abs(closed))))
    if np.max(np.abs(exponential - closed)) > ROUTE_AGREEMENT_RTOL * scale:
        raise AssertionError(
            f"spine kernel routes disagree at beta={params.beta}, J={params.J}"
        )
    support = (v,) + successors(v)
    return LocalOperator(support, closed)


def vertex_kernel(params: ModelParams, v) -> LocalOperator:
    """The kernel attached to v: tooth form for l >= 1, spine form for l = 0."""
    v = as_vertex(v)
    if v.l == 0:
        return kernel_l2(params, v)
    return kernel_l1(params.beta, v)


def layer_kernel(n: int, params: ModelParams,
                 max_level: int = DEFAULT_MAX_LAYER_LEVEL) -> LocalOperator:
    """Tensor product of the vertex kernels across level n.

    The support concatenates, for each x in level(n) in order, x followed by
    its successors; it covers level(n) ∪ level(n+1), 2n+3 sites in total.
    The dense matrix dimension grows as 2**(2n+3).
    """
    if n < 0:
        raise ValueError("level index must be non-negative")
    if n > max_level:
        raise ValueError("volume too large")
    op = None
    for x in comb_graph.level(n):
        k = vertex_kernel(params, x)
        op = k if op is None else op_algebra.tensor(op, k)
    return op


def layer_kernel_diagonal(n: int, params: ModelParams) -> tuple[tuple[Vertex, ...], np.ndarray]:
    """Support and diagonal vector of ``layer_kernel`` without densifying.

    All kernels are diagonal by construction; this is the representation the
    product-formula evaluator uses for volumes whose dense matrix would not
    fit in memory.  Diagonality is asserted on each factor.
    """
    if n < 0:
        raise ValueError("level index must be non-negative")
    support: tuple[Vertex, ...] = ()
    diag = np.ones(1, dtype=complex)
    for x in comb_graph.level(n):
        k = vertex_kernel(params, x)
        off = k.mat - np.diag(np.diag(k.mat))
        if np.max(np.abs(off)) > ROUTE_AGREEMENT_RTOL * max(1.0, np.max(np.abs(k.mat))):
            raise AssertionError("vertex kernel is not diagonal")
        support = support + k.support
        diag = np.kron(diag, np.diag(k.mat))
    return support, diag
