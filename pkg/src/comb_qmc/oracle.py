"""Brute-force reference evaluation of the state on small volumes.

``brute_force_phi`` follows the defining nested-expectation construction
literally: materialize the observable on the ball of radius n+1, sandwich
it between the boundary square roots, then apply the layer expectations
E_n, ..., E_0 as global maps (whole-layer kernels, single global partial
traces) and close with rho0.  Nothing here factorizes over vertices, so a
locality bug in the engine's per-vertex sweep cannot be replicated on this
path; the only shared code is the operator algebra and the kernels
themselves, which are the model's data.

Volumes up to ``FULL_DENSE_MAX_SITES`` sites are handled entirely as dense
matrices on the full ball, accepting arbitrary (non-product) observables.
Between that and the site cap, the identity tensor factor of each
E_k = id ⊗ E_[k,k+1] is applied across the product cut instead of being
materialized (a 15-site ball would need a 16 GiB matrix); the layer maps
themselves stay whole-layer dense.  That tier requires product observables.

``verify_localization`` checks the layer factorization claim the engine
relies on: the whole-layer global map against the per-vertex maps, on
random dense layer observables.
"""

from __future__ import annotations

import numpy as np

from . import comb_graph, config
from .boundary_solver import BoundaryField
from .comb_graph import Vertex
from .ising_kernels import ModelParams, layer_kernel, vertex_kernel
from .op_algebra import (
    LocalOperator,
    embed,
    identity_on,
    partial_trace_onto,
    psd_sqrt,
    sandwich,
    single_site,
    tensor,
)

__all__ = ["FULL_DENSE_MAX_SITES", "brute_force_phi", "verify_localization"]

#: Largest ball materialized as one dense matrix (2**10 dimensions).
FULL_DENSE_MAX_SITES = 10


def _support_max_level(support) -> int:
    return max((v.level for v in support), default=0)


def _tensor_chain(pieces) -> LocalOperator:
    op = None
    for piece in pieces:
        op = piece if op is None else tensor(op, piece)
    return op


def _phi_full_dense(a: LocalOperator, n: int, params: ModelParams,
                    field: BoundaryField) -> complex:
    """Literal evaluation with every operator dense on the full ball."""
    ball = comb_graph.volume(n + 1)
    x = embed(a, ball)

    sqrt_h = psd_sqrt(field.h)
    boundary_root = _tensor_chain(
        single_site(y, sqrt_h) for y in comb_graph.level(n + 1)
    )
    s = embed(boundary_root, ball)
    x = LocalOperator(ball, s.mat @ x.mat @ s.mat)

    for k in range(n, -1, -1):
        kernel = embed(layer_kernel(k, params, max_level=max(k, 6)), x.support)
        x = partial_trace_onto(sandwich(kernel, x), comb_graph.volume(k))
    return field.rho0(x.mat)


def _phi_product_cut(a, n: int, params: ModelParams,
                     field: BoundaryField) -> complex:
    """Same maps with the identity factor of E_k applied across the cut.

    Valid because the observable is a product of single-site factors: after
    each layer map the state operator factorizes as (untouched observable
    factors on the inner ball) ⊗ (dense matrix on the current level), so
    E_k = id ⊗ E_[k,k+1] acts entirely on the dense layer part.
    """
    sqrt_h = psd_sqrt(field.h)

    top = comb_graph.level(n + 1)
    layer_sites = comb_graph.level(n) + top
    observable_part = _tensor_chain(
        [single_site(x, a.factor_at(x)) for x in comb_graph.level(n)]
        + [single_site(y, np.eye(2, dtype=complex)) for y in top]
    )
    sqrt_part = _tensor_chain(
        [identity_on([x]) for x in comb_graph.level(n)]
        + [single_site(y, sqrt_h) for y in top]
    )
    x = LocalOperator(layer_sites,
                      sqrt_part.mat @ observable_part.mat @ sqrt_part.mat)
    kernel = embed(layer_kernel(n, params, max_level=max(n, 6)), layer_sites)
    current = partial_trace_onto(sandwich(kernel, x), comb_graph.level(n))

    for k in range(n - 1, -1, -1):
        layer_sites = comb_graph.level(k) + comb_graph.level(k + 1)
        inner = _tensor_chain(
            single_site(v, a.factor_at(v)) for v in comb_graph.level(k)
        )
        x = tensor(inner, current)
        kernel = embed(layer_kernel(k, params, max_level=max(k, 6)), layer_sites)
        current = partial_trace_onto(sandwich(kernel, x), comb_graph.level(k))
    return field.rho0(current.mat)


def brute_force_phi(a, n: int, params: ModelParams,
                    field: BoundaryField | None = None,
                    max_sites: int | None = None) -> complex:
    """Reference value of the state on ``a`` over the ball of radius n.

    ``a`` may be an Observable (product of single-site factors) or, on
    volumes small enough for the full-dense tier, any LocalOperator.  The
    ball of radius n+1 must fit under the site cap.
    """
    n = int(n)
    if n < 0:
        raise ValueError("volume index must be non-negative")
    cap = config.site_cap() if max_sites is None else int(max_sites)
    ball_sites = (n + 2) * (n + 3) // 2
    if ball_sites > cap:
        raise ValueError("oracle volume too large")
    if field is None:
        field = BoundaryField.disordered(params)

    is_product = hasattr(a, "factor_at") and hasattr(a, "factors")
    support = a.support
    if len(support) > 0 and _support_max_level(support) > n:
        raise ValueError("observable support exceeds the ball of radius n")

    if ball_sites <= FULL_DENSE_MAX_SITES:
        dense = a.to_local_operator() if is_product else a
        return _phi_full_dense(dense, n, params, field)
    if not is_product:
        raise ValueError(
            "volume too large for dense multi-site observables; "
            "only product observables run on this tier"
        )
    return _phi_product_cut(a, n, params, field)


def verify_localization(n: int, params: ModelParams, n_samples: int = 8,
                        seed: int = 20260814) -> float:
    """Worst entrywise gap between the whole-layer map and per-vertex maps.

    Draws random dense (generally non-product) observables on the sites of
    levels n and n+1, pushes each through (i) conjugation by the single
    whole-layer kernel followed by one global partial trace and (ii) the
    per-vertex transition expectations applied one vertex at a time, and
    returns the largest entrywise difference.  A correct layer
    factorization makes this rounding-level.
    """
    if n < 0:
        raise ValueError("level index must be non-negative")
    layer_sites = comb_graph.level(n) + comb_graph.level(n + 1)
    if len(layer_sites) > FULL_DENSE_MAX_SITES:
        raise ValueError("oracle volume too large")
    dim = 2 ** len(layer_sites)
    rng = np.random.default_rng(seed)
    kernel = embed(layer_kernel(n, params, max_level=max(n, 6)), layer_sites)

    worst = 0.0
    for _ in range(n_samples):
        mat = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        sample = LocalOperator(layer_sites, mat)

        global_route = partial_trace_onto(sandwich(kernel, sample),
                                          comb_graph.level(n))

        local_route = sample
        for x in comb_graph.level(n):
            vertex_map = embed(vertex_kernel(params, x), local_route.support)
            conjugated = sandwich(vertex_map, local_route)
            keep = tuple(v for v in local_route.support
                         if v not in set(comb_graph.successors(x)))
            local_route = partial_trace_onto(conjugated, keep)

        worst = max(worst, float(np.max(np.abs(global_route.mat - local_route.mat))))
    return worst
