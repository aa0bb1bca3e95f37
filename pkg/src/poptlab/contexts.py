"""Contexts: commutative operator subalgebras and their projective measurements.

A context is an orthonormal basis together with a partition of its index set
into degeneracy blocks; the associated commutative algebra is spanned by the
block projectors.  The set of all contexts is a continuum, so "for all
contexts" is always exercised on structured families (computational, Fourier)
plus seeded Haar samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DimensionError, PartitionError
from .operator_core import dagger, identity, max_norm
from .serialize import matrix_from_json, matrix_to_json

UNITARY_TOL = 1e-9
PVM_TOL = 1e-9

Partition = tuple[tuple[int, ...], ...]


def _normalize_partition(dim: int, partition: Iterable[Iterable[int]]) -> Partition:
    blocks = tuple(tuple(int(i) for i in block) for block in partition)
    if not blocks or any(not block for block in blocks):
        raise PartitionError("partition must consist of nonempty blocks")
    flat = [i for block in blocks for i in block]
    if sorted(flat) != list(range(dim)):
        raise PartitionError(f"partition {blocks} does not cover 0..{dim - 1} exactly once")
    return blocks


@dataclass(frozen=True)
class Context:
    """Orthonormal basis plus index partition into degeneracy blocks."""

    dim: int
    basis: np.ndarray
    partition: Partition

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.complex128)
        if basis.shape != (self.dim, self.dim):
            raise DimensionError(f"basis shape {basis.shape} does not match dim {self.dim}")
        if max_norm(dagger(basis) @ basis - identity(self.dim)) > UNITARY_TOL:
            raise DimensionError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "partition", _normalize_partition(self.dim, self.partition))

    @property
    def is_trivial(self) -> bool:
        return len(self.partition) == 1

    @property
    def is_maximal(self) -> bool:
        return len(self.partition) == self.dim


@dataclass(frozen=True)
class ProductContext:
    """Pair of one-sided contexts, ordered componentwise."""

    left: Context
    right: Context


def computational_context(dim: int, partition_shape: Sequence[int] | None = None) -> Context:
    return Context(dim, identity(dim), _partition_from_shape(dim, partition_shape))


def fourier_context(dim: int, partition_shape: Sequence[int] | None = None) -> Context:
    j = np.arange(dim)
    basis = np.exp(2j * np.pi * np.outer(j, j) / dim) / np.sqrt(dim)
    return Context(dim, basis, _partition_from_shape(dim, partition_shape))


def _partition_from_shape(dim: int, shape: Sequence[int] | None) -> Partition:
    if shape is None:
        shape = [1] * dim
    if sum(shape) != dim or any(s <= 0 for s in shape):
        raise PartitionError(f"block sizes {list(shape)} do not sum to dim {dim}")
    blocks = []
    start = 0
    for s in shape:
        blocks.append(tuple(range(start, start + s)))
        start += s
    return tuple(blocks)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase-corrected diagonal."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_context(dim: int, partition_shape: Sequence[int], seed: int) -> Context:
    """Haar-random context with the given block sizes, deterministic per seed."""
    partition = _partition_from_shape(dim, partition_shape)
    rng = np.random.default_rng(seed)
    return Context(dim, haar_unitary(dim, rng), partition)


def pvm_of_context(v: Context) -> list[np.ndarray]:
    """One projector per partition block, P_B = sum of |b_k><b_k| over the block."""
    out = []
    for block in v.partition:
        cols = v.basis[:, list(block)]
        out.append(cols @ dagger(cols))
    return out


def is_valid_pvm(elements: Sequence[np.ndarray], tol: float = PVM_TOL) -> bool:
    """Mutual orthogonality plus completeness, both in max-norm."""
    if not len(elements):
        return False
    dim = elements[0].shape[0]
    total = np.zeros((dim, dim), dtype=np.complex128)
    for i, p in enumerate(elements):
        if p.shape != (dim, dim):
            return False
        total += p
        for q in elements[i + 1 :]:
            if max_norm(p @ q) > tol:
                return False
    return max_norm(total - identity(dim)) <= tol


def coarse_grain(pvm: Sequence[np.ndarray], merge: Sequence[Sequence[int]]) -> list[np.ndarray]:
    """Merge outcome groups of a PVM by summing their projectors."""
    flat = [i for group in merge for i in group]
    if sorted(flat) != list(range(len(pvm))):
        raise PartitionError(f"merge {merge} does not cover outcomes 0..{len(pvm) - 1} exactly once")
    return [sum(pvm[i] for i in group) for group in merge]


def merged_context(v: Context, merge: Sequence[Sequence[int]]) -> Context:
    """Same basis, with partition blocks merged according to ``merge``."""
    flat = [i for group in merge for i in group]
    if sorted(flat) != list(range(len(v.partition))):
        raise PartitionError(f"merge {merge} does not cover blocks 0..{len(v.partition) - 1} exactly once")
    blocks = tuple(tuple(i for b in group for i in v.partition[b]) for group in merge)
    return Context(v.dim, v.basis, blocks)


def refines(fine: Context, coarse: Context, tol: float = PVM_TOL) -> bool:
    """True when every projector of ``coarse`` is a sum of projectors of ``fine``."""
    if fine.dim != coarse.dim:
        raise DimensionError(f"context dims differ: {fine.dim} vs {coarse.dim}")
    fine_pvm = pvm_of_context(fine)
    for q in pvm_of_context(coarse):
        members = []
        for p in fine_pvm:
            overlap = float(np.real(np.trace(p @ q)))
            if overlap > 0.5 * float(np.real(np.trace(p))):
                members.append(p)
        resid = q - sum(members) if members else q
        if max_norm(resid) > tol:
            return False
    return True


def product_order_leq(a: ProductContext, b: ProductContext, tol: float = PVM_TOL) -> bool:
    """Componentwise coarsening order: a <= b iff b refines a on both sides."""
    return refines(b.left, a.left, tol) and refines(b.right, a.right, tol)


def contexts_equal(a: Context, b: Context, tol: float = PVM_TOL) -> bool:
    """Equality as projector sets; bases are non-unique under block rotations."""
    if a.dim != b.dim or len(a.partition) != len(b.partition):
        return False
    pvm_a, pvm_b = pvm_of_context(a), pvm_of_context(b)
    used = set()
    for p in pvm_a:
        hit = None
        for j, q in enumerate(pvm_b):
            if j not in used and max_norm(p - q) <= tol:
                hit = j
                break
        if hit is None:
            return False
        used.add(hit)
    return True


@dataclass(frozen=True)
class ContextSamplePlan:
    """How to draw the finite context family standing in for the continuum."""

    n_random: int = 200
    seed: int = 0
    include_structured: bool = True
    partition_shape: tuple[int, ...] | None = None


def sample_contexts(dim: int, plan: ContextSamplePlan) -> list[Context]:
    shape = plan.partition_shape if plan.partition_shape is not None else tuple([1] * dim)
    out: list[Context] = []
    if plan.include_structured:
        out.append(computational_context(dim, shape))
        out.append(fourier_context(dim, shape))
    out.extend(random_context(dim, shape, plan.seed + k) for k in range(plan.n_random))
    return out


def overlapping_family(dim: int, seed: int, split: int | None = None) -> tuple[Context, Context, Context]:
    """Two maximal contexts refining one shared coarse context.

    The second fine context rotates the first inside the block spanned by
    indices ``split..dim-1``, so both restrict to the same two-block coarse
    context.  Used to manufacture genuine sub-context overlaps for
    no-disturbance scenarios.
    """
    if dim < 3:
        raise DimensionError("overlap families need dim >= 3")
    split = 1 if split is None else split
    rng = np.random.default_rng(seed)
    base = haar_unitary(dim, rng)
    fine1 = Context(dim, base, tuple((i,) for i in range(dim)))
    rot = identity(dim)
    block = dim - split
    rot[split:, split:] = haar_unitary(block, rng)
    fine2 = Context(dim, base @ rot, tuple((i,) for i in range(dim)))
    coarse = Context(dim, base, (tuple(range(split)), tuple(range(split, dim))))
    return fine1, fine2, coarse


def context_to_json(v: Context) -> dict[str, Any]:
    return {
        "dim": v.dim,
        "basis": matrix_to_json(v.basis),
        "partition": [list(block) for block in v.partition],
    }


def context_from_json(obj: dict[str, Any]) -> Context:
    return Context(int(obj["dim"]), matrix_from_json(obj["basis"]), tuple(tuple(b) for b in obj["partition"]))
