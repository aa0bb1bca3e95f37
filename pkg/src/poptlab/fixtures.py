"""Seeded generators for the named example classes used across tests and docs.

Every generator is deterministic under its seed and returns the object
together with a machine-checkable certificate of the class it claims:
eigenvalue witnesses for the operator families, planted magnitudes for the
counterexample tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .contexts import fourier_context, pvm_of_context
from .errors import InvalidSpec
from .measures import (
    CoarseDeclaration,
    OperatorBackedMeasure,
    TabulatedMeasure,
    check_popt,
)
from .operator_core import dagger, eig_hermitian, identity, partial_transpose

STATE_KINDS = ("haar_pure", "ginibre_mixed", "max_entangled", "swap_popt", "pt_of", "werner")
TABLE_KINDS = ("planted_signalling", "planted_contextual")


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate: kind, per-side dimensions, seed, extra parameters.

    ``pt_of`` wraps another state kind named in ``parameters["kind"]``;
    ``werner`` reads the mixing weight from ``parameters["p"]``.
    """

    kind: str
    dims: tuple[int, int] = (3, 3)
    seed: int = 0
    parameters: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class GeneratedFixture:
    spec: GeneratorSpec
    state: np.ndarray | None
    table: TabulatedMeasure | None
    certificate: dict[str, Any]


def haar_state_vector(d: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density(d: int, seed: int) -> np.ndarray:
    """Full-rank mixed state from the Ginibre ensemble, G G*/tr."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ dagger(g)
    return m / m.trace()


def max_entangled_state(d: int) -> np.ndarray:
    psi = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        psi[i * d + i] = 1.0 / np.sqrt(d)
    return np.outer(psi, psi.conj())


def swap_matrix(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            s[i * d + j, j * d + i] = 1.0
    return s


def werner_family(d: int, p: float) -> np.ndarray:
    """(1 + p SWAP) normalized; p = 0 is maximally mixed, p < -1/d breaks PPT."""
    if not -1.0 <= p <= 1.0:
        raise InvalidSpec(f"werner weight must lie in [-1, 1], got {p}")
    m = identity(d * d) + p * swap_matrix(d)
    return m / m.trace()


def random_povm(d: int, k: int, seed: int) -> list[np.ndarray]:
    """k random positive elements normalized to sum to the identity."""
    rng = np.random.default_rng(seed)
    raw = []
    for _ in range(k):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        raw.append(g @ dagger(g))
    total = sum(raw)
    spec = eig_hermitian(total)
    inv_sqrt = (spec.eigenvectors / np.sqrt(spec.eigenvalues)) @ dagger(spec.eigenvectors)
    return [inv_sqrt @ e @ inv_sqrt for e in raw]


def trine_povm() -> list[np.ndarray]:
    """Three symmetric rank-1 qubit effects 2/3 |theta_j><theta_j|."""
    out = []
    for j in range(3):
        angle = 2.0 * np.pi * j / 3.0
        v = np.array([np.cos(angle / 2.0), np.sin(angle / 2.0)], dtype=np.complex128)
        out.append(2.0 / 3.0 * np.outer(v, v.conj()))
    return out


def planted_signalling_table(magnitude: float = 0.05) -> TabulatedMeasure:
    """Uniform two-setting table with one left marginal shifted by ``magnitude``.

    The (0,0) block moves weight between two joint outcomes of the same
    column, so normalization and the right marginals survive while the left
    marginal under right setting 0 differs from the one under right setting 1
    by exactly the planted amount.
    """
    if not 0.0 < magnitude <= 0.25:
        raise InvalidSpec(f"planted magnitude must lie in (0, 0.25], got {magnitude}")
    comp0 = np.diag([1.0, 0.0]).astype(np.complex128)
    comp1 = np.diag([0.0, 1.0]).astype(np.complex128)
    plus = np.full((2, 2), 0.5, dtype=np.complex128)
    minus = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=np.complex128)
    pvms = ((comp0, comp1), (plus, minus))
    uniform = np.full((2, 2), 0.25)
    bumped = uniform.copy()
    bumped[0, 0] += magnitude
    bumped[1, 0] -= magnitude
    table = ((bumped, uniform), (uniform, uniform))
    return TabulatedMeasure(2, 2, pvms, pvms, table)


def planted_contextual_table(magnitude: float = 0.05) -> TabulatedMeasure:
    """Non-signalling qutrit scenario that disturbs a declared coarse-graining.

    Two maximal left settings share the projector onto |0> and both declare
    the two-outcome coarse setting as their coarse-graining.  The second fine
    setting shifts ``magnitude`` of joint weight into the shared projector
    under every right setting, so its left marginal is consistent across
    right settings (no signalling) while its restriction disagrees with the
    coarse table by exactly the planted amount.
    """
    if not 0.0 < magnitude <= 0.05:
        raise InvalidSpec(f"planted magnitude must lie in (0, 0.05], got {magnitude}")
    e = identity(3)
    p0 = np.outer(e[:, 0], e[:, 0].conj())
    p1 = np.outer(e[:, 1], e[:, 1].conj())
    p2 = np.outer(e[:, 2], e[:, 2].conj())
    mid = (e[:, 1] + e[:, 2]) / np.sqrt(2.0)
    mid2 = (e[:, 1] - e[:, 2]) / np.sqrt(2.0)
    q1 = np.outer(mid, mid.conj())
    q2 = np.outer(mid2, mid2.conj())
    left = ((p0, p1, p2), (p0, q1, q2), (p0, p1 + p2))
    right = (tuple(pvm_of_context(fourier_context(3))), (p0, p1, p2))

    u = np.array([0.2, 0.3, 0.5])
    u_coarse = np.array([0.2, 0.8])
    shift = np.array([magnitude, -magnitude, 0.0])
    r0 = np.array([0.4, 0.3, 0.3])
    r1 = np.array([0.3, 0.3, 0.4])

    def block(left_marg, right_marg, bump=None):
        t = np.outer(left_marg, right_marg)
        if bump is not None:
            t[:, 0] += bump
        return t

    table = (
        (block(u, r0), block(u, r1)),
        (block(u, r0, bump=shift), block(u + shift, r1)),
        (block(u_coarse, r0), block(u_coarse, r1)),
    )
    coarse = (
        CoarseDeclaration("left", 0, 2, ((0,), (1, 2))),
        CoarseDeclaration("left", 1, 2, ((0,), (1, 2))),
    )
    return TabulatedMeasure(3, 3, left, right, table, coarse)


def _state_for(spec: GeneratorSpec) -> tuple[np.ndarray, dict[str, Any]]:
    d1, d2 = spec.dims
    kind = spec.kind
    if kind == "haar_pure":
        psi = haar_state_vector(d1 * d2, spec.seed)
        rho = np.outer(psi, psi.conj())
        cert = {"purity": float(np.real(np.trace(rho @ rho)))}
    elif kind == "ginibre_mixed":
        rho = random_density(d1 * d2, spec.seed)
        cert = {}
    elif kind == "max_entangled":
        if d1 != d2:
            raise InvalidSpec("maximally entangled states need equal factor dimensions")
        rho = max_entangled_state(d1)
        cert = {}
    elif kind == "swap_popt":
        if d1 != d2:
            raise InvalidSpec("the swap operator needs equal factor dimensions")
        rho = swap_matrix(d1) / d1
        popt = check_popt(rho, spec.dims, restarts=int(spec.parameters.get("restarts", 32)), seed=spec.seed)
        cert = {"popt_min": popt.min_value, "is_popt": popt.is_popt}
    elif kind == "werner":
        if d1 != d2:
            raise InvalidSpec("the werner family needs equal factor dimensions")
        rho = werner_family(d1, float(spec.parameters.get("p", 0.0)))
        cert = {"p": float(spec.parameters.get("p", 0.0))}
    elif kind == "pt_of":
        inner_kind = spec.parameters.get("kind")
        if inner_kind not in STATE_KINDS or inner_kind == "pt_of":
            raise InvalidSpec(f"pt_of needs an inner state kind, got {inner_kind!r}")
        inner_params = {k: v for k, v in spec.parameters.items() if k != "kind"}
        inner, inner_cert = _state_for(GeneratorSpec(inner_kind, spec.dims, spec.seed, inner_params))
        rho = partial_transpose(inner, spec.dims, side=1)
        cert = {"inner_kind": inner_kind, "inner_min_eigenvalue": float(eig_hermitian(inner).eigenvalues[-1])}
    else:
        raise InvalidSpec(f"unknown state kind {kind!r}")
    cert["min_eigenvalue"] = float(eig_hermitian(rho).eigenvalues[-1])
    cert["trace"] = float(np.real(np.trace(rho)))
    return rho, cert


def generate(spec: GeneratorSpec) -> GeneratedFixture:
    """Produce the requested fixture with its certificate; seed-deterministic."""
    if spec.kind in STATE_KINDS:
        state, cert = _state_for(spec)
        return GeneratedFixture(spec=spec, state=state, table=None, certificate=cert)
    if spec.kind == "planted_signalling":
        magnitude = float(spec.parameters.get("magnitude", 0.05))
        table = planted_signalling_table(magnitude)
        return GeneratedFixture(spec=spec, state=None, table=table, certificate={"magnitude": magnitude})
    if spec.kind == "planted_contextual":
        magnitude = float(spec.parameters.get("magnitude", 0.05))
        table = planted_contextual_table(magnitude)
        return GeneratedFixture(spec=spec, state=None, table=table, certificate={"magnitude": magnitude})
    raise InvalidSpec(f"unknown generator kind {spec.kind!r}")


def operator_measure(spec: GeneratorSpec) -> OperatorBackedMeasure:
    """Convenience: generate a state kind and wrap it as a measure."""
    fixture = generate(spec)
    if fixture.state is None:
        raise InvalidSpec(f"kind {spec.kind!r} generates a table, not a state")
    return OperatorBackedMeasure(fixture.state, spec.dims)
