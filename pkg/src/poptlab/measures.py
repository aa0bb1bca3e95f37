"""Product measures over pairs of local projections.

Two concrete carriers:

* :class:`OperatorBackedMeasure` evaluates mu(q1, q2) = tr[rho (q1 x q2)] from
  a stored Hermitian operator and therefore satisfies every marginalisation
  constraint identically, by linearity of the trace.
* :class:`TabulatedMeasure` is a finite scenario: per-side PVM lists, a joint
  probability table per setting pair, and explicit declarations of which
  settings coarse-grain which.  Sub-context relations are never inferred from
  the numbers; the declarations are part of the data.

On top of these sit the no-signalling and no-disturbance checkers, the
tomographic reconstruction of the backing operator from measurement values
(the constructive half of the Gleason-type correspondence), and the
positivity-on-product-states (POPT) test.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Sequence
import warnings

import numpy as np

from .contexts import (
    Context,
    ContextSamplePlan,
    is_valid_pvm,
    pvm_of_context,
    refines,
    sample_contexts,
)
from .errors import (
    DimensionError,
    InconsistentOracle,
    InvalidInput,
    NumericalError,
    PartitionError,
    ReconstructionError,
    UnsupportedQuery,
)
from .operator_core import (
    dagger,
    ensure_hermitian,
    ensure_projection,
    identity,
    max_norm,
    partial_trace,
)
from .serialize import matrix_from_json, matrix_to_json

TAB_TOL = 1e-9
TRACE_TOL = 1e-9
MATCH_TOL = 1e-9
IMAG_TOL = 1e-10

Oracle = Callable[[np.ndarray, np.ndarray], float]


def _real_trace_product(rho4: np.ndarray, q1: np.ndarray, q2: np.ndarray) -> float:
    """tr[rho (q1 x q2)] via the reshaped (d1,d2,d1,d2) tensor; asserts realness."""
    val = complex(np.einsum("ikjl,ji,lk->", rho4, q1, q2))
    if abs(val.imag) > IMAG_TOL:
        raise NumericalError(f"measure value has imaginary part {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class OperatorBackedMeasure:
    """Measure evaluated as tr[rho (q1 x q2)] for a unit-trace Hermitian rho."""

    rho: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self):
        rho = ensure_hermitian(self.rho)
        d1, d2 = self.dims
        if rho.shape != (d1 * d2, d1 * d2):
            raise DimensionError(f"state shape {rho.shape} does not match dims {self.dims}")
        tr = float(rho.trace().real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidInput(f"measure is not normalized: tr = {tr!r}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "dims", (int(d1), int(d2)))

    @property
    def _rho4(self) -> np.ndarray:
        d1, d2 = self.dims
        return self.rho.reshape(d1, d2, d1, d2)

    def evaluate(self, q1: np.ndarray, q2: np.ndarray) -> float:
        return _real_trace_product(self._rho4, q1, q2)

    def marginal_left(self, q1: np.ndarray) -> float:
        reduced = partial_trace(self.rho, self.dims, keep=1)
        val = complex(np.trace(reduced @ q1))
        return float(val.real)

    def marginal_right(self, q2: np.ndarray) -> float:
        reduced = partial_trace(self.rho, self.dims, keep=2)
        val = complex(np.trace(reduced @ q2))
        return float(val.real)


@dataclass(frozen=True)
class CoarseDeclaration:
    """Statement that setting ``coarse`` is a coarse-graining of setting ``fine``.

    ``merge[k]`` lists the fine outcomes that fuse into coarse outcome ``k``.
    ``side`` is "left" or "right".
    """

    side: str
    fine: int
    coarse: int
    merge: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise PartitionError(f"side must be 'left' or 'right', got {self.side!r}")
        object.__setattr__(self, "merge", tuple(tuple(int(i) for i in g) for g in self.merge))


@dataclass(frozen=True)
class TabulatedMeasure:
    """Finite scenario: PVMs per setting, joint tables, declared coarse-grainings.

    ``table[x][y]`` is the (outcomes of left setting x) by (outcomes of right
    setting y) array of joint probabilities.
    """

    d1: int
    d2: int
    left_pvms: tuple[tuple[np.ndarray, ...], ...]
    right_pvms: tuple[tuple[np.ndarray, ...], ...]
    table: tuple[tuple[np.ndarray, ...], ...]
    coarse: tuple[CoarseDeclaration, ...] = ()

    def __post_init__(self):
        left = tuple(tuple(ensure_projection(p) for p in pvm) for pvm in self.left_pvms)
        right = tuple(tuple(ensure_projection(p) for p in pvm) for pvm in self.right_pvms)
        for side, pvms, d in (("left", left, self.d1), ("right", right, self.d2)):
            for x, pvm in enumerate(pvms):
                if any(p.shape != (d, d) for p in pvm):
                    raise DimensionError(f"{side} setting {x} has projectors of the wrong dimension")
                if not is_valid_pvm(pvm):
                    raise InvalidInput(f"{side} setting {x} is not a valid PVM")
        tab = tuple(tuple(np.asarray(t, dtype=np.float64) for t in row) for row in self.table)
        if len(tab) != len(left) or any(len(row) != len(right) for row in tab):
            raise DimensionError("table shape does not match the setting counts")
        for x, row in enumerate(tab):
            for y, block in enumerate(row):
                if block.shape != (len(left[x]), len(right[y])):
                    raise DimensionError(f"table block ({x},{y}) has shape {block.shape}")
                if np.any(block < -TAB_TOL) or np.any(block > 1.0 + TAB_TOL):
                    raise InvalidInput(f"table block ({x},{y}) has entries outside [0, 1]")
                if abs(float(block.sum()) - 1.0) > TRACE_TOL:
                    raise InvalidInput(f"table block ({x},{y}) sums to {block.sum()!r}, not 1")
        object.__setattr__(self, "left_pvms", left)
        object.__setattr__(self, "right_pvms", right)
        object.__setattr__(self, "table", tab)
        object.__setattr__(self, "coarse", tuple(self.coarse))
        for dec in self.coarse:
            self._validate_declaration(dec)

    def _pvms(self, side: str):
        return self.left_pvms if side == "left" else self.right_pvms

    def _validate_declaration(self, dec: CoarseDeclaration) -> None:
        pvms = self._pvms(dec.side)
        if not (0 <= dec.fine < len(pvms) and 0 <= dec.coarse < len(pvms)):
            raise PartitionError(f"declaration references unknown {dec.side} settings {dec.fine}/{dec.coarse}")
        fine_n, coarse_n = len(pvms[dec.fine]), len(pvms[dec.coarse])
        flat = [i for g in dec.merge for i in g]
        if len(dec.merge) != coarse_n or sorted(flat) != list(range(fine_n)):
            raise PartitionError(
                f"merge {dec.merge} does not map {fine_n} fine outcomes onto {coarse_n} coarse outcomes"
            )

    def _match(self, side: str, q: np.ndarray) -> tuple[int, int]:
        for x, pvm in enumerate(self._pvms(side)):
            for i, p in enumerate(pvm):
                if p.shape == q.shape and max_norm(p - q) <= MATCH_TOL:
                    return x, i
        raise UnsupportedQuery(f"projection is not tabulated on the {side} side")

    def evaluate(self, q1: np.ndarray, q2: np.ndarray) -> float:
        """Look up the joint probability; only tabulated projections are known.

        When a projection occurs in several settings the first match is used;
        cross-setting consistency is the no-disturbance checker's job.
        """
        x, i = self._match("left", q1)
        y, j = self._match("right", q2)
        return float(self.table[x][y][i, j])

    def marginal_left(self, q1: np.ndarray) -> float:
        """Left marginal, summed against right setting 0 as the reference."""
        x, i = self._match("left", q1)
        return float(self.table[x][0][i, :].sum())

    def marginal_right(self, q2: np.ndarray) -> float:
        y, j = self._match("right", q2)
        return float(self.table[0][y][:, j].sum())


ProductMeasure = OperatorBackedMeasure | TabulatedMeasure


@dataclass(frozen=True)
class ConstraintReport:
    """Outcome of a marginalisation-constraint sweep with its worst witness."""

    satisfied: bool
    max_violation: float
    witness: str
    tolerance: float

    def to_json(self) -> dict[str, Any]:
        return {
            "satisfied": self.satisfied,
            "max_violation": self.max_violation,
            "witness": self.witness,
            "tolerance": self.tolerance,
        }


def _ns_operator_backed(mu: OperatorBackedMeasure, plan: ContextSamplePlan, tol: float) -> ConstraintReport:
    d1, d2 = mu.dims
    left = sample_contexts(d1, plan)
    right = sample_contexts(d2, ContextSamplePlan(plan.n_random, plan.seed + 7919, plan.include_structured))
    worst, witness = 0.0, "no violation"
    for k, (vl, vr) in enumerate(zip(left, right)):
        pvm_l, pvm_r = pvm_of_context(vl), pvm_of_context(vr)
        for i, q1 in enumerate(pvm_l):
            gap = abs(sum(mu.evaluate(q1, q2) for q2 in pvm_r) - mu.marginal_left(q1))
            if gap > worst:
                worst, witness = gap, f"left projector {i} of context pair {k}"
        for j, q2 in enumerate(pvm_r):
            gap = abs(sum(mu.evaluate(q1, q2) for q1 in pvm_l) - mu.marginal_right(q2))
            if gap > worst:
                worst, witness = gap, f"right projector {j} of context pair {k}"
    return ConstraintReport(worst <= tol, worst, witness, tol)


def _ns_tabulated(mu: TabulatedMeasure, tol: float) -> ConstraintReport:
    worst, witness = 0.0, "no violation"
    for x in range(len(mu.left_pvms)):
        margs = np.stack([mu.table[x][y].sum(axis=1) for y in range(len(mu.right_pvms))])
        gap = float(np.max(margs.max(axis=0) - margs.min(axis=0))) if margs.size else 0.0
        if gap > worst:
            i = int(np.argmax(margs.max(axis=0) - margs.min(axis=0)))
            worst, witness = gap, f"left setting {x}, outcome {i}: marginal varies with the right setting"
    for y in range(len(mu.right_pvms)):
        margs = np.stack([mu.table[x][y].sum(axis=0) for x in range(len(mu.left_pvms))])
        gap = float(np.max(margs.max(axis=0) - margs.min(axis=0))) if margs.size else 0.0
        if gap > worst:
            j = int(np.argmax(margs.max(axis=0) - margs.min(axis=0)))
            worst, witness = gap, f"right setting {y}, outcome {j}: marginal varies with the left setting"
    return ConstraintReport(worst <= tol, worst, witness, tol)


def check_no_signalling(
    mu: ProductMeasure,
    plan: ContextSamplePlan | None = None,
    tol: float = 1e-10,
) -> ConstraintReport:
    """Verify that one side's marginals ignore the other side's setting.

    Operator-backed measures are sampled over ``plan`` context pairs (default
    200 Haar contexts plus the structured bases) and satisfy the constraint
    identically; tabulated measures are checked exhaustively over their
    finite setting grid and ``plan`` is ignored.
    """
    if isinstance(mu, OperatorBackedMeasure):
        return _ns_operator_backed(mu, plan or ContextSamplePlan(), tol)
    return _ns_tabulated(mu, tol)


def check_no_disturbance(mu: TabulatedMeasure, tol: float = 1e-10) -> ConstraintReport:
    """Verify marginal consistency across every declared sub-context overlap.

    For each declaration, the fine table pushed through the outcome merge
    must reproduce the coarse table against every remote setting.  The
    trivial-context specialisation (plain no-signalling) is included in the
    reported maximum.
    """
    worst_report = _ns_tabulated(mu, tol)
    worst, witness = worst_report.max_violation, worst_report.witness
    if worst_report.satisfied:
        witness = "no violation"
    for dec in mu.coarse:
        if dec.side == "left":
            for y in range(len(mu.right_pvms)):
                fine, coarse = mu.table[dec.fine][y], mu.table[dec.coarse][y]
                pushed = np.stack([fine[list(g), :].sum(axis=0) for g in dec.merge])
                gap = float(np.max(np.abs(pushed - coarse)))
                if gap > worst:
                    worst = gap
                    witness = (
                        f"left settings fine={dec.fine} coarse={dec.coarse} disagree "
                        f"against right setting {y}"
                    )
        else:
            for x in range(len(mu.left_pvms)):
                fine, coarse = mu.table[x][dec.fine], mu.table[x][dec.coarse]
                pushed = np.stack([fine[:, list(g)].sum(axis=1) for g in dec.merge], axis=1)
                gap = float(np.max(np.abs(pushed - coarse)))
                if gap > worst:
                    worst = gap
                    witness = (
                        f"right settings fine={dec.fine} coarse={dec.coarse} disagree "
                        f"against left setting {x}"
                    )
    return ConstraintReport(worst <= tol, worst, witness, tol)


def check_no_disturbance_operator(
    mu: OperatorBackedMeasure,
    n_families: int = 12,
    seed: int = 0,
    tol: float = 1e-10,
) -> ConstraintReport:
    """No-disturbance for an operator-backed measure over sampled overlaps.

    Builds per-side families of two maximal contexts sharing a coarse
    sub-context, tabulates the measure on them, and runs the declared-overlap
    checker; satisfied identically by linearity of the trace.
    """
    from .contexts import overlapping_family

    d1, d2 = mu.dims
    worst_report = ConstraintReport(True, 0.0, "no violation", tol)
    for k in range(n_families):
        left = list(overlapping_family(d1, seed + 2 * k))
        right = list(overlapping_family(d2, seed + 2 * k + 1))
        report = check_no_disturbance(tabulate(mu, left, right), tol)
        if report.max_violation >= worst_report.max_violation:
            worst_report = ConstraintReport(
                report.satisfied, report.max_violation, f"family {k}: {report.witness}", tol
            )
    return worst_report


def _coarse_merge(fine: Context, coarse: Context) -> tuple[tuple[int, ...], ...]:
    fine_pvm, coarse_pvm = pvm_of_context(fine), pvm_of_context(coarse)
    merge = []
    for q in coarse_pvm:
        members = tuple(
            i
            for i, p in enumerate(fine_pvm)
            if float(np.real(np.trace(p @ q))) > 0.5 * float(np.real(np.trace(p)))
        )
        merge.append(members)
    return tuple(merge)


def tabulate(
    mu: OperatorBackedMeasure,
    left_contexts: Sequence[Context],
    right_contexts: Sequence[Context],
    declare_coarse: bool = True,
) -> TabulatedMeasure:
    """Restrict an operator-backed measure to a finite scenario.

    Coarse-graining declarations are derived from the context objects
    themselves (projector-sum refinement), which is construction-time
    knowledge, not a numerical fishing expedition over the tables.
    """
    left_pvms = [pvm_of_context(v) for v in left_contexts]
    right_pvms = [pvm_of_context(v) for v in right_contexts]
    table = [
        [
            np.array([[mu.evaluate(p, q) for q in pvm_r] for p in pvm_l], dtype=np.float64)
            for pvm_r in right_pvms
        ]
        for pvm_l in left_pvms
    ]
    decs: list[CoarseDeclaration] = []
    if declare_coarse:
        for side, ctxs in (("left", left_contexts), ("right", right_contexts)):
            for f, vf in enumerate(ctxs):
                for c, vc in enumerate(ctxs):
                    if f != c and refines(vf, vc):
                        decs.append(CoarseDeclaration(side, f, c, _coarse_merge(vf, vc)))
    return TabulatedMeasure(mu.dims[0], mu.dims[1], tuple(map(tuple, left_pvms)), tuple(map(tuple, right_pvms)), tuple(map(tuple, table)), tuple(decs))


# ---------------------------------------------------------------------------
# Tomographic reconstruction
# ---------------------------------------------------------------------------


def tomography_family(d: int) -> list[np.ndarray]:
    """Canonical informationally complete family of d^2 rank-1 projections.

    Projectors onto |j>, (|j>+|k>)/sqrt2 and (|j>+i|k>)/sqrt2 for j < k, in
    that order.  Their real span is the full Hermitian space; the Gram matrix
    in the Hilbert-Schmidt inner product has rank d^2.
    """
    if d < 2:
        raise DimensionError(f"tomography family needs dimension >= 2, got {d}")
    fam = []
    for j in range(d):
        v = np.zeros(d, dtype=np.complex128)
        v[j] = 1.0
        fam.append(np.outer(v, v.conj()))
    for j in range(d):
        for k in range(j + 1, d):
            for amp in (1.0, 1j):
                v = np.zeros(d, dtype=np.complex128)
                v[j] = 1.0 / np.sqrt(2.0)
                v[k] = amp / np.sqrt(2.0)
                fam.append(np.outer(v, v.conj()))
    return fam


def family_gram(family: Sequence[np.ndarray]) -> np.ndarray:
    """Hilbert-Schmidt Gram matrix tr[P_a P_b] of an operator family."""
    stack = np.stack(family)
    return np.real(np.einsum("aij,bji->ab", stack, stack))


def _hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis (d^2, d, d) under the HS inner product."""
    mats = []
    for i in range(d):
        e = np.zeros((d, d), dtype=np.complex128)
        e[i, i] = 1.0
        mats.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            s = np.zeros((d, d), dtype=np.complex128)
            s[i, j] = s[j, i] = 1.0 / np.sqrt(2.0)
            mats.append(s)
            a = np.zeros((d, d), dtype=np.complex128)
            a[i, j] = 1j / np.sqrt(2.0)
            a[j, i] = -1j / np.sqrt(2.0)
            mats.append(a)
    return np.stack(mats)


@lru_cache(maxsize=None)
def _side_system(d: int) -> tuple:
    """Per-side solve data: family stack, basis stack, coefficient matrix."""
    family = np.stack(tomography_family(d))
    basis = _hermitian_basis(d)
    m = np.real(np.einsum("aij,mji->am", family, basis))
    return family, basis, m, float(np.linalg.cond(m))


def gleason_extend(
    oracle: Oracle,
    dims: tuple[int, int],
    allow_dim2: bool = False,
    residual_tol: float = 1e-8,
    cond_limit: float = 1e10,
    return_residual: bool = False,
):
    """Reconstruct the unique Hermitian rho reproducing the oracle values.

    The oracle is queried on the product tomography grid augmented with the
    identity on each side (the identity is itself a projection).  The square
    family-product system pins rho; the identity rows overdetermine it and
    their residual is the consistency certificate: it vanishes exactly when
    the values extend to a linear functional, and normalization tr(rho) = 1
    is enforced through the (identity, identity) entry.

    Dimensions below 3 are rejected unless ``allow_dim2`` is set, because the
    measure-to-operator correspondence needs POVM-level data in dimension 2;
    the flag is intended for operator-backed round trips only.
    """
    d1, d2 = dims
    if min(d1, d2) < 2:
        raise DimensionError(f"factor dims must be >= 2, got {dims}")
    if min(d1, d2) < 3:
        if not allow_dim2:
            raise DimensionError(
                "reconstruction requires both factor dimensions >= 3; "
                "pass allow_dim2=True for operator-backed round trips"
            )
        warnings.warn(
            "dimension-2 reconstruction is only sound for operator-backed oracles; "
            "projective data does not determine general dimension-2 measures",
            stacklevel=2,
        )
    fam1, basis1, m1, cond1 = _side_system(d1)
    fam2, basis2, m2, cond2 = _side_system(d2)
    if cond1 * cond2 > cond_limit:
        raise ReconstructionError(f"system condition number {cond1 * cond2:.3e} exceeds {cond_limit:.0e}")

    aug1 = list(fam1) + [identity(d1)]
    aug2 = list(fam2) + [identity(d2)]
    values = np.array([[float(oracle(p, q)) for q in aug2] for p in aug1])

    core = values[: d1 * d1, : d2 * d2]
    x = np.linalg.solve(m1, core)
    x = np.linalg.solve(m2, x.T).T
    rho = np.einsum("mn,mab,ncd->acbd", x, basis1, basis2).reshape(d1 * d2, d1 * d2)
    rho = (rho + dagger(rho)) / 2.0

    rho4 = rho.reshape(d1, d2, d1, d2)
    predicted = np.real(np.einsum("acbd,xba,ydc->xy", rho4, np.stack(aug1), np.stack(aug2)))
    residual = float(np.max(np.abs(predicted - values)))
    if residual > residual_tol:
        raise InconsistentOracle(
            f"oracle values are not linearly extendable: residual {residual:.3e} > {residual_tol:.0e}",
            residual=residual,
        )
    return (rho, residual) if return_residual else rho


def tabulate_tomography_grid(mu: OperatorBackedMeasure) -> dict[str, Any]:
    """Serialize the identity-augmented tomography grid of a measure."""
    d1, d2 = mu.dims
    aug1 = tomography_family(d1) + [identity(d1)]
    aug2 = tomography_family(d2) + [identity(d2)]
    values = [[mu.evaluate(p, q) for q in aug2] for p in aug1]
    return {"d1": d1, "d2": d2, "values": values}


def oracle_from_grid(obj: dict[str, Any]) -> tuple[Oracle, tuple[int, int], list[tuple[int, int]]]:
    """Build an oracle from a grid JSON object; reports missing (null) entries."""
    try:
        d1, d2 = int(obj["d1"]), int(obj["d2"])
        values = obj["values"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed tomography grid: {exc}") from exc
    n1, n2 = d1 * d1 + 1, d2 * d2 + 1
    if len(values) != n1 or any(len(row) != n2 for row in values):
        raise InvalidInput(f"grid must be {n1} x {n2} including the identity row/column")
    missing = [(a, b) for a in range(n1) for b in range(n2) if values[a][b] is None]
    aug1 = tomography_family(d1) + [identity(d1)]
    aug2 = tomography_family(d2) + [identity(d2)]

    def oracle(q1: np.ndarray, q2: np.ndarray) -> float:
        a = next((i for i, p in enumerate(aug1) if max_norm(p - q1) <= MATCH_TOL), None)
        b = next((j for j, p in enumerate(aug2) if max_norm(p - q2) <= MATCH_TOL), None)
        if a is None or b is None or values[a][b] is None:
            raise UnsupportedQuery("grid does not cover the queried projection pair")
        return float(values[a][b])

    return oracle, (d1, d2), missing


# ---------------------------------------------------------------------------
# POPT testing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoptCertificate:
    """Result of minimizing <psi x phi| rho |psi x phi> over unit product vectors.

    A negative minimum is a definitive disproof of the POPT property; a
    non-negative one certifies it only up to the multistart sampling, which
    is the documented one-sided guarantee.
    """

    is_popt: bool
    min_value: float
    witness_left: np.ndarray
    witness_right: np.ndarray
    restarts_used: int

    def to_json(self) -> dict[str, Any]:
        return {
            "is_popt": self.is_popt,
            "min_value": self.min_value,
            "witness_left": {"re": self.witness_left.real.tolist(), "im": self.witness_left.imag.tolist()},
            "witness_right": {"re": self.witness_right.real.tolist(), "im": self.witness_right.imag.tolist()},
            "restarts_used": self.restarts_used,
        }


def _random_unit(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _bottom_eigpair(m: np.ndarray) -> tuple[float, np.ndarray]:
    m = (m + dagger(m)) / 2.0
    vals, vecs = np.linalg.eigh(m)
    return float(vals[0]), vecs[:, 0]


def check_popt(
    rho: np.ndarray,
    dims: tuple[int, int],
    restarts: int = 64,
    tol: float = 1e-8,
    seed: int = 0,
    max_sweeps: int = 200,
) -> PoptCertificate:
    """Multistart alternating eigen-iteration for the product-state minimum.

    With one factor fixed, the objective is a quadratic form whose minimizer
    is a bottom eigenvector of the conditioned operator, so each half-sweep
    is an exact coordinate minimization and the objective never increases.
    Restart r uses seed ``seed + r``.
    """
    rho = ensure_hermitian(rho)
    d1, d2 = dims
    if rho.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"state shape {rho.shape} does not match dims {dims}")
    tr = float(rho.trace().real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidInput(f"POPT test expects a unit-trace operator, got tr = {tr!r}")
    rho4 = rho.reshape(d1, d2, d1, d2)

    best_val = np.inf
    best_pair: tuple[np.ndarray, np.ndarray] | None = None
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        phi = _random_unit(rng, d2)
        prev = np.inf
        psi = _random_unit(rng, d1)
        for _ in range(max_sweeps):
            conditioned_left = np.einsum("ikjl,k,l->ij", rho4, phi.conj(), phi)
            f_left, psi = _bottom_eigpair(conditioned_left)
            conditioned_right = np.einsum("ikjl,i,j->kl", rho4, psi.conj(), psi)
            f_right, phi = _bottom_eigpair(conditioned_right)
            if not (f_left <= prev + 1e-12 and f_right <= f_left + 1e-12):
                raise NumericalError("alternating POPT sweep increased the objective")
            if prev - f_right < 1e-13:
                prev = f_right
                break
            prev = f_right
        if prev < best_val:
            best_val, best_pair = prev, (psi.copy(), phi.copy())

    assert best_pair is not None
    psi, phi = best_pair
    recomputed = float(np.real(np.einsum("ikjl,i,k,j,l->", rho4, psi.conj(), phi.conj(), psi, phi)))
    if abs(recomputed - best_val) > 1e-10:
        raise NumericalError(f"witness value drifted: {recomputed!r} vs {best_val!r}")
    return PoptCertificate(
        is_popt=best_val >= -tol,
        min_value=best_val,
        witness_left=psi,
        witness_right=phi,
        restarts_used=restarts,
    )


# ---------------------------------------------------------------------------
# Scenario wire format
# ---------------------------------------------------------------------------


def scenario_to_json(mu: TabulatedMeasure) -> dict[str, Any]:
    return {
        "d1": mu.d1,
        "d2": mu.d2,
        "left_pvms": [[matrix_to_json(p) for p in pvm] for pvm in mu.left_pvms],
        "right_pvms": [[matrix_to_json(p) for p in pvm] for pvm in mu.right_pvms],
        "coarse": [
            {"side": dec.side, "fine": dec.fine, "coarse": dec.coarse, "merge": [list(g) for g in dec.merge]}
            for dec in mu.coarse
        ],
        "table": [[block.tolist() for block in row] for row in mu.table],
    }


def scenario_from_json(obj: dict[str, Any]) -> TabulatedMeasure:
    try:
        decs = tuple(
            CoarseDeclaration(d["side"], int(d["fine"]), int(d["coarse"]), tuple(tuple(g) for g in d["merge"]))
            for d in obj.get("coarse", [])
        )
        return TabulatedMeasure(
            d1=int(obj["d1"]),
            d2=int(obj["d2"]),
            left_pvms=tuple(tuple(matrix_from_json(p) for p in pvm) for pvm in obj["left_pvms"]),
            right_pvms=tuple(tuple(matrix_from_json(p) for p in pvm) for pvm in obj["right_pvms"]),
            table=tuple(tuple(np.asarray(block, dtype=np.float64) for block in row) for row in obj["table"]),
            coarse=decs,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed scenario object: {exc}") from exc
