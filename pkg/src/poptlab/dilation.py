"""Dilations: POVMs as compressed PVMs, CP maps as compressed representations.

The Naimark construction is the canonical block form: stack the element
square roots into an isometry-like column map and use the block identity
projectors upstairs.  The Stinespring construction reads operator
coefficients off the eigendecomposition of the map's positivity matrix and
assembles the representation a -> a (x) 1_m on an enlarged space.  Both
return a :class:`Dilation` whose compression identity is verified at
construction time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .contexts import Context, pvm_of_context, random_context
from .errors import (
    DimensionError,
    InvalidInput,
    InvalidPOVM,
    NotCompletelyPositive,
    NumericalError,
)
from .jordan import LinearMapRep, apply_map, standard_choi
from .measures import ConstraintReport
from .operator_core import (
    dagger,
    eig_hermitian,
    ensure_hermitian,
    identity,
    is_psd,
    max_norm,
    tensor,
)
from .serialize import matrix_to_json, pvm_to_json

COMPRESSION_TOL = 1e-8
RANK_CUTOFF = 1e-10
PSD_ELEMENT_TOL = 1e-9


@dataclass(frozen=True)
class POVM:
    """Positive elements with a verified total.

    The total must sit below the identity, or match ``weight`` when the
    family is deliberately non-normalized (as happens for the per-context
    operator families induced by a bipartite state, whose total is the
    reduced operator rather than the identity).
    """

    elements: tuple[np.ndarray, ...]
    weight: np.ndarray | None = None

    def __post_init__(self):
        if not self.elements:
            raise InvalidPOVM("a POVM needs at least one element")
        elems = tuple(ensure_hermitian(e) for e in self.elements)
        d = elems[0].shape[0]
        if any(e.shape != (d, d) for e in elems):
            raise DimensionError("POVM elements have mixed dimensions")
        for i, e in enumerate(elems):
            low = is_psd(e, PSD_ELEMENT_TOL)
            if not low.is_psd:
                raise InvalidPOVM(f"element {i} has eigenvalue {low.min_eigenvalue:.3e}")
        total = sum(elems)
        if self.weight is not None:
            w = ensure_hermitian(self.weight)
            if max_norm(total - w) > PSD_ELEMENT_TOL:
                raise InvalidPOVM("declared weight does not match the element sum")
            object.__setattr__(self, "weight", w)
        else:
            top = eig_hermitian(total).eigenvalues[0]
            if top > 1.0 + PSD_ELEMENT_TOL:
                raise InvalidPOVM(f"element sum exceeds the identity: top eigenvalue {top!r}")
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def total(self) -> np.ndarray:
        return sum(self.elements)


@dataclass(frozen=True)
class Dilation:
    """A compression v* P v realizing a POVM (PVM case) or a map (representation case)."""

    dim_K: int
    v: np.ndarray
    pvm_K: tuple[np.ndarray, ...] | None = None
    representation_unitary: np.ndarray | None = None
    multiplicity: int | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"K": self.dim_K, "v": matrix_to_json(self.v)}
        if self.pvm_K is not None:
            out["pvm_K"] = pvm_to_json(self.pvm_K)
        if self.representation_unitary is not None:
            out["U"] = matrix_to_json(self.representation_unitary)
            out["multiplicity"] = self.multiplicity
        return out


def _psd_sqrt(e: np.ndarray) -> np.ndarray:
    spec = eig_hermitian(e)
    vals = np.clip(spec.eigenvalues, 0.0, None)
    return (spec.eigenvectors * np.sqrt(vals)) @ dagger(spec.eigenvectors)


def naimark_dilate(povm: POVM) -> Dilation:
    """Block dilation of a POVM to a PVM on C^(d k).

    The column map stacks the element square roots, so v* v equals the
    element sum and compressing the k block projectors returns the elements
    exactly; the residual is verified to 1e-8.
    """
    k, d = len(povm.elements), povm.dim
    dim_k = d * k
    v = np.vstack([_psd_sqrt(e) for e in povm.elements])
    pvm = []
    for i in range(k):
        q = np.zeros((dim_k, dim_k), dtype=np.complex128)
        q[i * d : (i + 1) * d, i * d : (i + 1) * d] = identity(d)
        pvm.append(q)
    worst = max(
        max_norm(dagger(v) @ q @ v - e) for q, e in zip(pvm, povm.elements)
    )
    if worst > COMPRESSION_TOL:
        raise NumericalError(f"dilation compression residual {worst:.3e} > {COMPRESSION_TOL:.0e}")
    return Dilation(dim_K=dim_k, v=v, pvm_K=tuple(pvm))


def stinespring_dilate(
    phi: LinearMapRep,
    require_cp: bool = True,
    tol: float = 1e-9,
    rank_cutoff: float = RANK_CUTOFF,
) -> Dilation:
    """Dilate a completely positive map to a compressed identity representation.

    The positivity matrix sum_ij |i><j| (x) phi(|i><j|) is eigendecomposed;
    its rank fixes the multiplicity m, and the map becomes
    phi(a) = v* (a (x) 1_m) v on C^(d_in m).  With ``require_cp`` a negative
    eigenvalue beyond ``tol`` aborts with the witness attached.
    """
    choi = standard_choi(phi)
    spec = eig_hermitian(choi)
    min_eig = float(spec.eigenvalues[-1])
    if require_cp and min_eig < -tol:
        raise NotCompletelyPositive(
            f"map is not completely positive: eigenvalue {min_eig:.6e}", min_eigenvalue=min_eig
        )
    keep = [i for i, lam in enumerate(spec.eigenvalues) if lam > rank_cutoff]
    m = max(len(keep), 1)
    d_in, d_out = phi.d_in, phi.d_out
    coeffs = []
    for i in keep:
        vec = spec.eigenvectors[:, i] * np.sqrt(max(spec.eigenvalues[i], 0.0))
        coeffs.append(vec.reshape(d_in, d_out).T)
    while len(coeffs) < m:
        coeffs.append(np.zeros((d_out, d_in), dtype=np.complex128))

    v = np.zeros((d_in * m, d_out), dtype=np.complex128)
    for alpha, op in enumerate(coeffs):
        v[alpha::m, :] = dagger(op)

    worst = 0.0
    for i in range(d_in):
        for j in range(d_in):
            unit = np.zeros((d_in, d_in), dtype=np.complex128)
            unit[i, j] = 1.0
            compressed = dagger(v) @ tensor(unit, identity(m)) @ v
            worst = max(worst, max_norm(compressed - apply_map(phi, unit)))
    if require_cp and worst > COMPRESSION_TOL:
        raise NumericalError(f"representation compression residual {worst:.3e} > {COMPRESSION_TOL:.0e}")
    return Dilation(
        dim_K=d_in * m,
        v=v,
        representation_unitary=identity(d_in * m),
        multiplicity=m,
    )


@dataclass(frozen=True)
class OrthomorphismReport:
    """Per-condition worst defects of a candidate projection-lattice map.

    Conditions, checked on sampled orthogonal pairs p q = 0:
    zero preservation, complementation, orthogonality of images, additivity.
    """

    zero_defect: float
    complement_defect: float
    orthogonality_defect: float
    additivity_defect: float
    samples: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tolerance

    @property
    def max_defect(self) -> float:
        return max(self.zero_defect, self.complement_defect, self.orthogonality_defect, self.additivity_defect)

    def to_json(self) -> dict[str, Any]:
        return {
            "zero_defect": self.zero_defect,
            "complement_defect": self.complement_defect,
            "orthogonality_defect": self.orthogonality_defect,
            "additivity_defect": self.additivity_defect,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _orthogonal_pair(dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random orthogonal projection pair built from one random maximal context."""
    ctx = random_context(dim, [1] * dim, int(rng.integers(0, 2**63 - 1)))
    pvm = pvm_of_context(ctx)
    cut1 = int(rng.integers(1, dim))
    cut2 = int(rng.integers(cut1, dim))
    p = sum(pvm[:cut1])
    q = sum(pvm[cut1:cut2]) if cut2 > cut1 else np.zeros_like(p)
    return p, q


def orthomorphism_check(
    phi_on_projections: Callable[[np.ndarray], np.ndarray],
    dim: int,
    samples: int = 50,
    seed: int = 0,
    tol: float = 1e-8,
) -> OrthomorphismReport:
    """Probe the four orthomorphism laws on sampled orthogonal pairs.

    The candidate map must send projections on C^dim to projections on a
    common codomain; the codomain identity is read off the image of the
    identity, which complementation is checked against.
    """
    rng = np.random.default_rng(seed)
    zero = np.zeros((dim, dim), dtype=np.complex128)
    image_of_identity = np.asarray(phi_on_projections(identity(dim)), dtype=np.complex128)
    dim_k = image_of_identity.shape[0]
    zero_defect = max_norm(np.asarray(phi_on_projections(zero), dtype=np.complex128))
    complement = orthogonality = additivity = 0.0
    for _ in range(samples):
        p, q = _orthogonal_pair(dim, rng)
        fp = np.asarray(phi_on_projections(p), dtype=np.complex128)
        fq = np.asarray(phi_on_projections(q), dtype=np.complex128)
        f1mp = np.asarray(phi_on_projections(identity(dim) - p), dtype=np.complex128)
        fpq = np.asarray(phi_on_projections(p + q), dtype=np.complex128)
        complement = max(complement, max_norm(f1mp - (identity(dim_k) - fp)))
        orthogonality = max(orthogonality, max_norm(fp @ fq))
        additivity = max(additivity, max_norm(fpq - fp - fq))
    return OrthomorphismReport(
        zero_defect=zero_defect,
        complement_defect=complement,
        orthogonality_defect=orthogonality,
        additivity_defect=additivity,
        samples=samples,
        tolerance=tol,
    )


def context_dilation_consistency(
    assignments: Sequence[tuple[Context, Sequence[np.ndarray]]],
    v: np.ndarray,
    tol: float = 1e-8,
    match_tol: float = 1e-9,
) -> ConstraintReport:
    """Check that shared projections receive one image across context dilations.

    ``assignments`` pairs each context with its upstairs PVM (one projector
    per partition block, same order).  Whenever two contexts contain the same
    downstairs projector, the assigned images must agree; the worst
    discrepancy and its witnessing triple are reported.  All entries must
    live on one dilation space and share the column map ``v``.
    """
    if not assignments:
        raise InvalidInput("need at least one context assignment")
    v = np.asarray(v, dtype=np.complex128)
    dim_k = v.shape[0]
    downstairs = []
    for idx, (ctx, pvm_k) in enumerate(assignments):
        if len(pvm_k) != len(ctx.partition):
            raise InvalidInput(f"assignment {idx} has {len(pvm_k)} projectors for {len(ctx.partition)} blocks")
        if any(q.shape != (dim_k, dim_k) for q in pvm_k):
            raise InvalidInput(f"assignment {idx} does not live on the shared dilation space K={dim_k}")
        downstairs.append(pvm_of_context(ctx))

    worst, witness = 0.0, "no shared projections"
    for a in range(len(assignments)):
        for b in range(a + 1, len(assignments)):
            for i, p in enumerate(downstairs[a]):
                for j, q in enumerate(downstairs[b]):
                    if p.shape == q.shape and max_norm(p - q) <= match_tol:
                        gap = max_norm(assignments[a][1][i] - assignments[b][1][j])
                        if gap >= worst:
                            worst = gap
                            witness = f"projector {i} of context {a} = projector {j} of context {b}"
    return ConstraintReport(worst <= tol, worst, witness, tol)
