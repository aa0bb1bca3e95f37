"""Linear maps between operator algebras and the time-orientation analysis.

A map phi: L(C^d_in) -> L(C^d_out) is stored through the bipartite matrix

    choi = sum_ij |i><j| (x) phi(|j><i|),

i.e. the block (i, j) holds phi applied to the *adjoint* of the matrix unit
|i><j|.  Under this convention the matrix built from a bipartite state rho by
phi(a) = tr_1[rho (a x 1)] is rho itself, so the state/map correspondence is
an exact bijection, and positivity of the stored matrix is equivalent to
complete positivity of the adjoint-corrected map a -> phi(a^T).

Orientation is probed through the sign of the commutator: a map is tagged
"preserving" when phi([a,b]) = [phi(a), phi(b)] on sampled Hermitian pairs,
"reversing" when phi([a,b]) = -[phi(a), phi(b)], and "neither" otherwise.
Maps with commutative image satisfy both trivially and are flagged as
degenerate rather than tagged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import DimensionError, NotCompletelyPositive, NumericalError
from .measures import PoptCertificate, check_popt
from .operator_core import (
    PsdResult,
    anticommutator,
    commutator,
    conjugation_flow,
    dagger,
    ensure_hermitian,
    identity,
    is_psd,
    max_norm,
    partial_transpose,
    tensor,
)
from .serialize import vector_to_json

ORIENTATION_TOL = 1e-8
FLOW_CHECK_TIMES = (0.1, 1.0, np.pi)


@dataclass(frozen=True)
class LinearMapRep:
    """Hermiticity-preserving linear map held through its bipartite matrix."""

    d_in: int
    d_out: int
    choi: np.ndarray

    def __post_init__(self):
        choi = ensure_hermitian(self.choi)
        if choi.shape != (self.d_in * self.d_out, self.d_in * self.d_out):
            raise DimensionError(f"choi shape {choi.shape} does not match dims ({self.d_in}, {self.d_out})")
        object.__setattr__(self, "choi", choi)


def rep_from_action(f: Callable[[np.ndarray], np.ndarray], d_in: int, d_out: int) -> LinearMapRep:
    """Assemble the stored matrix of a map given as a callable on matrices."""
    choi = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for i in range(d_in):
        for j in range(d_in):
            unit = np.zeros((d_in, d_in), dtype=np.complex128)
            unit[j, i] = 1.0
            block = np.asarray(f(unit), dtype=np.complex128)
            if block.shape != (d_out, d_out):
                raise DimensionError(f"map action returned shape {block.shape}, expected ({d_out}, {d_out})")
            choi[i * d_out : (i + 1) * d_out, j * d_out : (j + 1) * d_out] = block
    return LinearMapRep(d_in, d_out, choi)


def map_from_state(rho: np.ndarray, dims: tuple[int, int]) -> LinearMapRep:
    """The map a -> tr_1[rho (a x 1)] induced by a bipartite Hermitian rho.

    Its stored matrix is rho itself; :func:`state_from_map` inverts this
    exactly.
    """
    d1, d2 = dims
    rho = ensure_hermitian(rho)
    if rho.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"state shape {rho.shape} does not match dims {dims}")
    return LinearMapRep(d1, d2, rho)


def state_from_map(phi: LinearMapRep) -> np.ndarray:
    """Assemble sum_ij |i><j| (x) phi(|j><i|); inverse of :func:`map_from_state`."""
    return phi.choi.copy()


def apply_map(phi: LinearMapRep, a: np.ndarray) -> np.ndarray:
    """Evaluate phi(a) from the stored matrix; linear in a."""
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (phi.d_in, phi.d_in):
        raise DimensionError(f"argument shape {a.shape} does not match input dimension {phi.d_in}")
    choi4 = phi.choi.reshape(phi.d_in, phi.d_out, phi.d_in, phi.d_out)
    return np.einsum("ikjl,ji->kl", choi4, a)


def transpose_input(phi: LinearMapRep) -> LinearMapRep:
    """The map a -> phi(a^T); partial transposition of the stored matrix."""
    return LinearMapRep(phi.d_in, phi.d_out, partial_transpose(phi.choi, (phi.d_in, phi.d_out), side=1))


def standard_choi(phi: LinearMapRep) -> np.ndarray:
    """sum_ij |i><j| (x) phi(|i><j|): positive exactly when phi is CP."""
    return partial_transpose(phi.choi, (phi.d_in, phi.d_out), side=1)


def is_completely_positive(phi: LinearMapRep, tol: float = 1e-9) -> PsdResult:
    """Complete positivity of the adjoint-corrected map a -> phi(a^T).

    Under the storage convention this is positivity of the stored matrix, so
    for a map induced by a bipartite state the test reads back positivity of
    that state.  The bottom eigenpair is always returned as witness.
    """
    return is_psd(phi.choi, tol)


def _sample_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + dagger(g)) / 2.0


def jordan_defect(phi: LinearMapRep, samples: int = 50, seed: int = 0) -> float:
    """Worst normalized anticommutator defect over sampled Hermitian pairs.

    Zero (within tolerance) is a necessary condition for the map to act as a
    Jordan homomorphism on the sampled pairs; the scale-free normalization
    divides by the max-norms of both inputs.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a = _sample_hermitian(rng, phi.d_in)
        b = _sample_hermitian(rng, phi.d_in)
        lhs = apply_map(phi, anticommutator(a, b))
        rhs = anticommutator(apply_map(phi, a), apply_map(phi, b))
        worst = max(worst, max_norm(lhs - rhs) / (max_norm(a) * max_norm(b)))
    return worst


@dataclass(frozen=True)
class OrientationVerdict:
    """Commutator-sign classification of a map, with both defects reported.

    ``degenerate`` marks maps whose sampled commutator defects both vanish
    (commutative image); no tag is assigned there because the symmetric part
    alone cannot distinguish the two orientations.  ``finite_time_defect``
    records the worst deviation of the assigned tag's one-parameter flow
    intertwining check, when a tag was assigned.
    """

    tag: str
    max_defect_preserving: float
    max_defect_reversing: float
    sample_count: int
    degenerate: bool = False
    finite_time_defect: float | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "tag": self.tag,
            "max_defect_preserving": self.max_defect_preserving,
            "max_defect_reversing": self.max_defect_reversing,
            "sample_count": self.sample_count,
            "degenerate": self.degenerate,
            "finite_time_defect": self.finite_time_defect,
        }


def _finite_time_defect(phi: LinearMapRep, sign: int, rng: np.random.Generator) -> float:
    """Validate phi(e^{ita} b e^{-ita}) = e^{i s t phi(a)} phi(b) e^{-i s t phi(a)}."""
    worst = 0.0
    for t in FLOW_CHECK_TIMES:
        a = _sample_hermitian(rng, phi.d_in)
        b = _sample_hermitian(rng, phi.d_in)
        a /= max_norm(a)
        b /= max_norm(b)
        lhs = apply_map(phi, conjugation_flow(t, a, b))
        phi_a = ensure_hermitian(apply_map(phi, a), tol=1e-8)
        rhs = conjugation_flow(sign * t, phi_a, apply_map(phi, b))
        worst = max(worst, max_norm(lhs - rhs))
    return worst


def orientation_verdict(
    phi: LinearMapRep,
    samples: int = 50,
    seed: int = 0,
    tol: float = ORIENTATION_TOL,
) -> OrientationVerdict:
    """Classify a map by the sign with which it carries commutators.

    The differential criterion is primary: over sampled Hermitian pairs the
    preserving defect is ||phi([a,b]) - [phi(a),phi(b)]|| and the reversing
    defect flips the sign, both normalized by the input max-norms.  Whichever
    tag is assigned is then validated in finite time through the conjugation
    flow at a few incommensurate times.
    """
    rng = np.random.default_rng(seed)
    dp = dr = 0.0
    for _ in range(samples):
        a = _sample_hermitian(rng, phi.d_in)
        b = _sample_hermitian(rng, phi.d_in)
        scale = max_norm(a) * max_norm(b)
        lhs = apply_map(phi, commutator(a, b))
        rhs = commutator(apply_map(phi, a), apply_map(phi, b))
        dp = max(dp, max_norm(lhs - rhs) / scale)
        dr = max(dr, max_norm(lhs + rhs) / scale)

    degenerate = dp <= tol and dr <= tol
    if not degenerate and dp <= tol and dp < dr:
        tag = "preserving"
    elif not degenerate and dr <= tol and dr < dp:
        tag = "reversing"
    else:
        tag = "neither"

    ft = None
    if tag == "preserving":
        ft = _finite_time_defect(phi, +1, rng)
    elif tag == "reversing":
        ft = _finite_time_defect(phi, -1, rng)
    return OrientationVerdict(
        tag=tag,
        max_defect_preserving=dp,
        max_defect_reversing=dr,
        sample_count=samples,
        degenerate=degenerate,
        finite_time_defect=ft,
    )


@dataclass(frozen=True)
class TimeFlowPair:
    """Relative flow convention: reversed on the input side, canonical on the output."""

    left_sign: int = -1
    right_sign: int = +1

    def left_flow(self, t: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return conjugation_flow(self.left_sign * t, a, b)

    def right_flow(self, t: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return conjugation_flow(self.right_sign * t, a, b)


def reversed_flow(t: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Transpose-conjugated flow: T o flow(t, a^T) o T; equals the flow at -t.

    This is the operational form of "transposition reverses the time
    orientation": conjugating the one-parameter group by the transpose runs
    it backwards.
    """
    return conjugation_flow(t, np.asarray(a).T, np.asarray(b).T).T


# ---------------------------------------------------------------------------
# Classification pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassifyConfig:
    herm_tol: float = 1e-10
    trace_tol: float = 1e-9
    psd_tol: float = 1e-9
    popt_tol: float = 1e-8
    orientation_tol: float = ORIENTATION_TOL
    restarts: int = 64
    samples: int = 50
    seed: int = 0


@dataclass(frozen=True)
class ClassificationReport:
    """Everything the pipeline learned about one bipartite operator."""

    dims: tuple[int, int]
    trace: float
    is_hermitian: bool
    verdict: str
    reasons: tuple[str, ...] = ()
    is_psd: bool | None = None
    min_eigenvalue: float | None = None
    psd_witness: np.ndarray | None = None
    popt: PoptCertificate | None = None
    is_ppt: bool | None = None
    min_pt_eigenvalue: float | None = None
    jordan_defect: float | None = None
    orientation: OrientationVerdict | None = None
    dilation_multiplicity: int | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "dims": list(self.dims),
            "trace": self.trace,
            "is_hermitian": self.is_hermitian,
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "is_psd": self.is_psd,
            "min_eigenvalue": self.min_eigenvalue,
            "psd_witness": None if self.psd_witness is None else vector_to_json(self.psd_witness),
            "popt": None if self.popt is None else self.popt.to_json(),
            "is_ppt": self.is_ppt,
            "min_pt_eigenvalue": self.min_pt_eigenvalue,
            "jordan_defect": self.jordan_defect,
            "orientation": None if self.orientation is None else self.orientation.to_json(),
            "dilation_multiplicity": self.dilation_multiplicity,
        }


def classify(rho: np.ndarray, dims: tuple[int, int], config: ClassifyConfig | None = None) -> ClassificationReport:
    """Run the full pipeline: validity, positivity, POPT, PPT, orientation.

    The orientation verdict refers to the adjoint-corrected induced map.
    When that map (or its input-transposed twin) admits a representation on a
    larger space, the verdict and the Jordan defect are computed on the
    homomorphic lift, whose commutator sign is the meaningful one; otherwise
    the raw map is probed directly and typically lands on "neither".
    """
    cfg = config or ClassifyConfig()
    rho = np.asarray(rho, dtype=np.complex128)
    d1, d2 = dims
    if rho.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"state shape {rho.shape} does not match dims {dims}")
    trace = float(rho.trace().real)
    reasons: list[str] = []
    try:
        rho = ensure_hermitian(rho, cfg.herm_tol)
        hermitian = True
    except NumericalError as exc:
        hermitian = False
        reasons.append(str(exc))
    if abs(trace - 1.0) > cfg.trace_tol:
        reasons.append(f"trace {trace!r} differs from 1 beyond {cfg.trace_tol:.0e}")
    if reasons:
        return ClassificationReport(
            dims=(d1, d2), trace=trace, is_hermitian=hermitian, verdict="invalid", reasons=tuple(reasons)
        )

    psd = is_psd(rho, cfg.psd_tol)
    popt = check_popt(rho, dims, restarts=cfg.restarts, tol=cfg.popt_tol, seed=cfg.seed)
    pt = partial_transpose(rho, dims, side=1)
    ppt = is_psd(pt, cfg.psd_tol)

    from .dilation import stinespring_dilate  # deferred: dilation imports LinearMapRep from here

    phi = map_from_state(rho, dims)
    corrected = transpose_input(phi)
    lift_action = None
    multiplicity = None
    try:
        dil = stinespring_dilate(corrected, require_cp=True, tol=cfg.psd_tol)
        m, u = dil.multiplicity, dil.representation_unitary
        lift_action = lambda a: u @ tensor(a, identity(m)) @ dagger(u)
        multiplicity = m
    except NotCompletelyPositive:
        try:
            dil = stinespring_dilate(phi, require_cp=True, tol=cfg.psd_tol)
            m, u = dil.multiplicity, dil.representation_unitary
            lift_action = lambda a: u @ tensor(a.T, identity(m)) @ dagger(u)
            multiplicity = m
        except NotCompletelyPositive:
            lift_action = None

    if lift_action is not None:
        lift_rep = rep_from_action(lift_action, d1, d1 * multiplicity)
        jd = jordan_defect(lift_rep, samples=cfg.samples, seed=cfg.seed)
        orientation = orientation_verdict(lift_rep, samples=cfg.samples, seed=cfg.seed, tol=cfg.orientation_tol)
    else:
        jd = None
        orientation = orientation_verdict(corrected, samples=cfg.samples, seed=cfg.seed, tol=cfg.orientation_tol)

    if psd.is_psd:
        verdict = "quantum_state"
    elif popt.is_popt:
        verdict = "popt_only"
    else:
        verdict = "not_popt"
    return ClassificationReport(
        dims=(d1, d2),
        trace=trace,
        is_hermitian=True,
        verdict=verdict,
        is_psd=psd.is_psd,
        min_eigenvalue=psd.min_eigenvalue,
        psd_witness=psd.witness,
        popt=popt,
        is_ppt=ppt.is_psd,
        min_pt_eigenvalue=ppt.min_eigenvalue,
        jordan_defect=jd,
        orientation=orientation,
        dilation_multiplicity=multiplicity,
    )
