"""CHSH correlation layer: evaluation and optimization over dichotomic settings.

This module situates classifier outputs against the known correlation
landscape: the algebraic bound 4 (reached by the PR box table), the quantum
ceiling 2 sqrt 2, and the empirical observation that positivity on product
states already keeps optimized values below that ceiling.  Dimension-2
inputs are welcome here; only correlations are computed, never measure
extensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .contexts import haar_unitary
from .errors import DimensionError, InvalidSetting, NumericalError
from .measures import TabulatedMeasure
from .operator_core import dagger, ensure_hermitian, identity, max_norm
from .serialize import matrix_to_json

SETTING_TOL = 1e-9
TSIRELSON = 2.0 * np.sqrt(2.0)


def ensure_dichotomic(a: np.ndarray, tol: float = SETTING_TOL) -> np.ndarray:
    """Validate spectrum in {+1, -1} through the involution law A^2 = 1."""
    m = ensure_hermitian(a)
    if max_norm(m @ m - identity(m.shape[0])) > tol:
        raise InvalidSetting("observable does not square to the identity")
    return m


@dataclass(frozen=True)
class ChshInstance:
    """A bipartite Hermitian operator with two dichotomic settings per side."""

    rho: np.ndarray
    dims: tuple[int, int]
    settings: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        rho = ensure_hermitian(self.rho)
        d1, d2 = self.dims
        if rho.shape != (d1 * d2, d1 * d2):
            raise DimensionError(f"state shape {rho.shape} does not match dims {self.dims}")
        a0, a1, b0, b1 = (ensure_dichotomic(s) for s in self.settings)
        for s, d in ((a0, d1), (a1, d1), (b0, d2), (b1, d2)):
            if s.shape != (d, d):
                raise DimensionError(f"setting shape {s.shape} does not match its side dimension {d}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "settings", (a0, a1, b0, b1))


def _correlator(rho4: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.real(np.einsum("ikjl,ji,lk->", rho4, a, b)))


def chsh_value(inst: ChshInstance) -> float:
    """S = <A0 B0> + <A0 B1> + <A1 B0> - <A1 B1>; |S| <= 4 algebraically."""
    d1, d2 = inst.dims
    rho4 = inst.rho.reshape(d1, d2, d1, d2)
    a0, a1, b0, b1 = inst.settings
    s = (
        _correlator(rho4, a0, b0)
        + _correlator(rho4, a0, b1)
        + _correlator(rho4, a1, b0)
        - _correlator(rho4, a1, b1)
    )
    if abs(s) > 4.0 + 1e-9:
        raise NumericalError(f"CHSH value {s!r} exceeds the algebraic bound")
    return s


def chsh_table_value(mu: TabulatedMeasure) -> float:
    """CHSH functional of a 2-setting 2-outcome scenario table."""
    if len(mu.left_pvms) != 2 or len(mu.right_pvms) != 2:
        raise DimensionError("CHSH needs exactly two settings per side")
    if any(len(p) != 2 for p in mu.left_pvms) or any(len(p) != 2 for p in mu.right_pvms):
        raise DimensionError("CHSH needs dichotomic outcomes")
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    e = [[float(np.sum(mu.table[x][y] * signs)) for y in range(2)] for x in range(2)]
    return e[0][0] + e[0][1] + e[1][0] - e[1][1]


@dataclass(frozen=True)
class ChshResult:
    value: float
    settings: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    restarts: int

    def to_json(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "settings": [matrix_to_json(s) for s in self.settings],
            "restarts": self.restarts,
        }


def _balanced_signature(d: int) -> np.ndarray:
    plus = (d + 1) // 2
    return np.array([1.0] * plus + [-1.0] * (d - plus))


def _best_observable(m: np.ndarray, signature: np.ndarray) -> np.ndarray:
    """Maximize tr[A m] over A with the given +-1 signature.

    By the trace inequality the maximum pairs the descending eigenvalues of
    m with the descending signature entries, so each update step is an exact
    coordinate maximization.
    """
    vals, vecs = np.linalg.eigh((m + dagger(m)) / 2.0)
    vecs = vecs[:, ::-1]
    a = (vecs * signature) @ dagger(vecs)
    return (a + dagger(a)) / 2.0


def _random_dichotomic(d: int, signature: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = haar_unitary(d, rng)
    return (u * signature) @ dagger(u)


def optimize_chsh(
    rho: np.ndarray,
    dims: tuple[int, int],
    restarts: int = 64,
    seed: int = 0,
    max_sweeps: int = 500,
    ftol: float = 1e-12,
) -> ChshResult:
    """Multistart alternating ascent over fixed-signature dichotomic settings.

    Dimension 2 uses the traceless +-1 signature (the unit Bloch-vector
    observables); higher dimensions fix the balanced signature.  Each
    half-sweep replaces one side's settings by the exact maximizers given
    the other side, so the objective is non-decreasing; restart r draws its
    initial settings from seed ``seed + r``.  The reported value is
    recomputed from the returned settings.
    """
    rho = ensure_hermitian(rho)
    d1, d2 = dims
    if rho.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"state shape {rho.shape} does not match dims {dims}")
    rho4 = rho.reshape(d1, d2, d1, d2)
    sig1, sig2 = _balanced_signature(d1), _balanced_signature(d2)

    def cond_left(c: np.ndarray) -> np.ndarray:
        return np.einsum("ikjl,lk->ij", rho4, c)

    def cond_right(c: np.ndarray) -> np.ndarray:
        return np.einsum("ikjl,ji->kl", rho4, c)

    def objective(a0, a1, b0, b1) -> float:
        return (
            _correlator(rho4, a0, b0)
            + _correlator(rho4, a0, b1)
            + _correlator(rho4, a1, b0)
            - _correlator(rho4, a1, b1)
        )

    best_val = -np.inf
    best_settings = None
    for r in range(restarts):
        rng = np.random.default_rng(seed + r)
        b0 = _random_dichotomic(d2, sig2, rng)
        b1 = _random_dichotomic(d2, sig2, rng)
        a0 = a1 = None
        prev = -np.inf
        for _ in range(max_sweeps):
            a0 = _best_observable(cond_left(b0 + b1), sig1)
            a1 = _best_observable(cond_left(b0 - b1), sig1)
            b0 = _best_observable(cond_right(a0 + a1), sig2)
            b1 = _best_observable(cond_right(a0 - a1), sig2)
            val = objective(a0, a1, b0, b1)
            if val < prev - 1e-9:
                raise NumericalError("alternating CHSH sweep decreased the objective")
            if val - prev < ftol:
                prev = val
                break
            prev = val
        if prev > best_val:
            best_val = prev
            best_settings = (a0, a1, b0, b1)

    assert best_settings is not None
    value = chsh_value(ChshInstance(rho, dims, best_settings))
    if abs(value - best_val) > 1e-10:
        raise NumericalError(f"optimizer value {best_val!r} does not match its settings ({value!r})")
    return ChshResult(value=value, settings=best_settings, restarts=restarts)


def singlet_state() -> np.ndarray:
    """Two-qubit singlet density matrix (|01> - |10>)/sqrt2."""
    psi = np.zeros(4, dtype=np.complex128)
    psi[1] = 1.0 / np.sqrt(2.0)
    psi[2] = -1.0 / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


def pr_box_table() -> TabulatedMeasure:
    """The extremal no-signalling table: outcomes agree unless both settings are 1.

    Two settings per side, two outcomes each; the attached qubit PVMs
    (computational and Hadamard bases) merely label the settings, the table
    carries no operator backing.  Its CHSH functional evaluates to 4.
    """
    comp0 = np.diag([1.0, 0.0]).astype(np.complex128)
    comp1 = np.diag([0.0, 1.0]).astype(np.complex128)
    plus = np.full((2, 2), 0.5, dtype=np.complex128)
    minus = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=np.complex128)
    pvms = ((comp0, comp1), (plus, minus))
    agree = np.array([[0.5, 0.0], [0.0, 0.5]])
    disagree = np.array([[0.0, 0.5], [0.5, 0.0]])
    table = (
        (agree, agree),
        (agree, disagree),
    )
    return TabulatedMeasure(2, 2, pvms, pvms, table)
