"""Finite local operator algebra over comb-graph vertices.

Each vertex carries a qubit, M_2(C).  A :class:`LocalOperator` is a dense
complex matrix of dimension 2**s together with the ordered list of the s
vertices it acts on; the i-th tensor slot of the matrix belongs to the i-th
support vertex.

All traces in this package are dimension-normalized: ``normalized_trace``
divides the matrix trace by 2**s, so the identity has trace 1 on any
support, and ``partial_trace_onto`` carries a factor 1/2 per traced site.
With that convention the tooth transition kernel is exactly a conditional
density (its squared kernel partial-traces to the identity), and single-site
traces read Tr(h) = (h11 + h22)/2.

Operators are value objects: matrices are copied on construction and frozen,
and every operation returns a new instance.  Binary operations require
compatible supports; ``embed`` pads with identities and reorders tensor
factors explicitly, so there is no implicit site alignment anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .comb_graph import Vertex, as_vertex, canonical_key

__all__ = [
    "ID2",
    "SIGMA_Z",
    "LocalOperator",
    "local_operator",
    "single_site",
    "identity_on",
    "tensor",
    "embed",
    "aligned",
    "compose",
    "normalized_trace",
    "raw_trace",
    "partial_trace_onto",
    "sandwich",
    "is_hermitian",
    "is_positive",
    "psd_sqrt",
]

#: Single-site identity and Pauli z, the only fixed matrices the model needs.
ID2 = np.eye(2, dtype=complex)
SIGMA_Z = np.diag([1.0 + 0j, -1.0 + 0j])

HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class LocalOperator:
    """Dense operator on an ordered tuple of comb vertices.

    Attributes
    ----------
    support:
        Ordered tuple of distinct vertices; slot i of the matrix acts on
        ``support[i]``.
    mat:
        Complex matrix of shape (2**s, 2**s) with s = len(support).
        Stored read-only.
    """

    support: tuple[Vertex, ...]
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        support = tuple(as_vertex(v) for v in self.support)
        if len(set(support)) != len(support):
            raise ValueError("support collision")
        mat = np.array(self.mat, dtype=complex)
        dim = 2 ** len(support)
        if mat.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {mat.shape} does not match 2**{len(support)} support"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mat", mat)

    @property
    def num_sites(self) -> int:
        return len(self.support)

    @property
    def dim(self) -> int:
        return 2 ** len(self.support)

    def to_json(self) -> dict:
        """Wire format: support as [k, l] pairs, entries row-major re/im."""
        flat = self.mat.reshape(-1)
        return {
            "support": [list(v) for v in self.support],
            "re": [float(x) for x in flat.real],
            "im": [float(x) for x in flat.imag],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LocalOperator":
        support = tuple(as_vertex(v) for v in data["support"])
        dim = 2 ** len(support)
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
        if re.size != dim * dim or im.size != dim * dim:
            raise ValueError("entry count does not match support size")
        return cls(support, (re + 1j * im).reshape(dim, dim))


def local_operator(support, mat) -> LocalOperator:
    """Construct a LocalOperator from any vertex iterable and array-like."""
    return LocalOperator(tuple(as_vertex(v) for v in support), np.asarray(mat))


def single_site(v, mat2) -> LocalOperator:
    """Wrap a 2x2 matrix acting on a single vertex."""
    return local_operator([v], mat2)


def identity_on(support) -> LocalOperator:
    support = tuple(as_vertex(v) for v in support)
    return LocalOperator(support, np.eye(2 ** len(support), dtype=complex))


def tensor(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    """Tensor product on the concatenated support; supports must be disjoint."""
    if set(a.support) & set(b.support):
        raise ValueError("support collision")
    return LocalOperator(a.support + b.support, np.kron(a.mat, b.mat))


def _permute_sites(mat: np.ndarray, perm: list[int]) -> np.ndarray:
    """Reorder the tensor slots of a 2**s operator by ``perm``.

    ``perm[i]`` is the current slot that becomes slot i of the result.
    """
    s = len(perm)
    tensor_view = mat.reshape((2,) * (2 * s))
    axes = perm + [s + p for p in perm]
    return tensor_view.transpose(axes).reshape(2**s, 2**s)


def embed(a: LocalOperator, target_support) -> LocalOperator:
    """Extend ``a`` by identities onto ``target_support``, in the target order.

    The target must contain every support vertex of ``a``.  Missing sites are
    padded with the identity and the tensor slots are permuted to match the
    target order exactly.
    """
    target = tuple(as_vertex(v) for v in target_support)
    if len(set(target)) != len(target):
        raise ValueError("support collision")
    missing = [v for v in target if v not in set(a.support)]
    if len(a.support) + len(missing) != len(target):
        raise ValueError("support not contained in target support")
    padded_support = a.support + tuple(missing)
    padded = np.kron(a.mat, np.eye(2 ** len(missing), dtype=complex))
    pos = {v: i for i, v in enumerate(padded_support)}
    perm = [pos[v] for v in target]
    return LocalOperator(target, _permute_sites(padded, perm))


def aligned(a: LocalOperator, b: LocalOperator) -> tuple[LocalOperator, LocalOperator]:
    """Embed both operators onto their support union in canonical order."""
    union = sorted(set(a.support) | set(b.support), key=canonical_key)
    return embed(a, union), embed(b, union)


def compose(a: LocalOperator, b: LocalOperator) -> LocalOperator:
    """Operator product a·b after aligning supports."""
    ea, eb = aligned(a, b)
    return LocalOperator(ea.support, ea.mat @ eb.mat)


def normalized_trace(a: LocalOperator) -> complex:
    """Matrix trace divided by the dimension; identity traces to 1."""
    return complex(np.trace(a.mat)) / a.dim


def raw_trace(a: LocalOperator) -> complex:
    """Plain matrix trace, exposed for debugging only."""
    return complex(np.trace(a.mat))


def partial_trace_onto(a: LocalOperator, keep) -> LocalOperator:
    """Normalized partial trace onto the ordered vertex list ``keep``.

    Sites not in ``keep`` are traced out with a factor 1/2 each, so the
    result of tracing x ⊗ y onto supp(x) is x · normalized_trace(y).
    """
    keep = tuple(as_vertex(v) for v in keep)
    if len(set(keep)) != len(keep):
        raise ValueError("support collision")
    if not set(keep) <= set(a.support):
        raise ValueError("keep sites not contained in support")
    traced = [v for v in a.support if v not in set(keep)]
    reordered = embed(a, keep + tuple(traced)) if a.support != keep + tuple(traced) else a
    s = a.num_sites
    m = len(keep)
    tensor_view = reordered.mat.reshape((2,) * (2 * s))
    # contract row and column indices of each traced site pairwise
    subscripts_in = list(range(s)) + list(range(s, 2 * s))
    for i in range(m, s):
        subscripts_in[s + i] = i
    subscripts_out = list(range(m)) + list(range(s, s + m))
    result = np.einsum(tensor_view, subscripts_in, subscripts_out)
    result = result.reshape(2**m, 2**m) / 2 ** (s - m)
    return LocalOperator(keep, result)


def sandwich(k: LocalOperator, a: LocalOperator) -> LocalOperator:
    """Conjugation k* · a · k on a shared support (embed first otherwise)."""
    if k.support != a.support:
        raise ValueError("support mismatch")
    return LocalOperator(a.support, k.mat.conj().T @ a.mat @ k.mat)


def is_hermitian(a: LocalOperator, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(a.mat - a.mat.conj().T)) <= tol)


def is_positive(a: LocalOperator, tol: float = POSITIVITY_TOL) -> bool:
    """Positive semidefiniteness up to ``tol``; rejects non-Hermitian input."""
    if not is_hermitian(a, tol):
        raise ValueError("non-Hermitian input")
    eigenvalues = np.linalg.eigvalsh((a.mat + a.mat.conj().T) / 2)
    return bool(eigenvalues.min() >= -tol)


def psd_sqrt(mat: np.ndarray, tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Principal square root of a positive-semidefinite Hermitian matrix."""
    mat = np.asarray(mat, dtype=complex)
    if np.max(np.abs(mat - mat.conj().T)) > tol:
        raise ValueError("non-Hermitian input")
    eigenvalues, vectors = np.linalg.eigh((mat + mat.conj().T) / 2)
    if eigenvalues.min() < -tol:
        raise ValueError("matrix is not positive semidefinite")
    return (vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ vectors.conj().T
