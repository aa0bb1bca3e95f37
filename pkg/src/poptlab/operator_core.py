"""Dense complex-operator kernel.

Everything downstream works with plain ``numpy.ndarray`` matrices of dtype
complex128.  The helpers here validate and normalize the algebraic classes
used throughout (Hermitian operators, projections), provide tensor-factor
operations (Kronecker products, partial trace, partial transpose), spectral
decompositions, and the symmetric/antisymmetric products together with the
one-parameter conjugation flow built on them.

Tolerances are explicit module constants; all routines are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError

HERM_TOL = 1e-10
EIG_TOL = 1e-9
FLOW_TOL = 1e-9

__all__ = [
    "HERM_TOL",
    "EIG_TOL",
    "FLOW_TOL",
    "Spectrum",
    "PsdResult",
    "max_norm",
    "dagger",
    "as_matrix",
    "ensure_hermitian",
    "is_projection_matrix",
    "projection_rank",
    "ensure_projection",
    "identity",
    "tensor",
    "partial_trace",
    "partial_transpose",
    "eig_hermitian",
    "is_psd",
    "anticommutator",
    "commutator",
    "jordan_product_pm",
    "conjugation_flow",
    "unitary_exp",
]


def max_norm(a: np.ndarray) -> float:
    """Entrywise max-modulus norm, the norm used for every tolerance here."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite complex128 2-D array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise NumericalError("matrix contains NaN or Inf entries")
    return m


def ensure_hermitian(a, tol: float = HERM_TOL) -> np.ndarray:
    """Validate near-Hermiticity and return the exactly symmetrized form.

    The returned matrix is ``(a + a†)/2``.  Raises :class:`NumericalError`
    when the anti-Hermitian part exceeds ``tol`` in max-norm; on an already
    Hermitian input the symmetrization is a no-op up to one rounding step.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"Hermitian operator must be square, got {m.shape}")
    defect = max_norm(m - dagger(m))
    if defect > tol:
        raise NumericalError(f"matrix is not Hermitian: anti-Hermitian part {defect:.3e} > {tol:.3e}")
    return (m + dagger(m)) / 2.0


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128)


def is_projection_matrix(p: np.ndarray, tol: float = HERM_TOL) -> bool:
    """True when ``p`` is Hermitian and idempotent within ``tol``."""
    if p.shape[0] != p.shape[1]:
        return False
    if max_norm(p - dagger(p)) > tol:
        return False
    return max_norm(p @ p - p) <= tol


def projection_rank(p: np.ndarray) -> int:
    """Rank of a projection, read off its trace."""
    return int(round(p.trace().real))


def ensure_projection(p, tol: float = HERM_TOL) -> np.ndarray:
    """Validate the projection laws and return the symmetrized matrix."""
    m = ensure_hermitian(p, tol)
    idem = max_norm(m @ m - m)
    if idem > tol:
        raise NumericalError(f"matrix is not idempotent: max-norm defect {idem:.3e} > {tol:.3e}")
    return m


def tensor(a, b) -> np.ndarray:
    """Kronecker product with the (i1 i2, j1 j2) -> a[i1,j1] b[i2,j2] convention."""
    return np.kron(as_matrix(a), as_matrix(b))


def _reshape_bipartite(m: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    d1, d2 = dims
    if m.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"matrix shape {m.shape} does not match factor dims {dims}")
    return m.reshape(d1, d2, d1, d2)


def partial_trace(m, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one tensor factor of a bipartite matrix.

    ``keep`` is 1 or 2 and names the factor that survives.  The trace of the
    output equals the trace of the input.
    """
    t = _reshape_bipartite(as_matrix(m), dims)
    if keep == 1:
        return np.einsum("ikjk->ij", t)
    if keep == 2:
        return np.einsum("kikj->ij", t)
    raise DimensionError(f"keep must be 1 or 2, got {keep}")


def partial_transpose(m, dims: tuple[int, int], side: int) -> np.ndarray:
    """Transpose one tensor factor in the computational basis.

    Applying the same side twice returns the original matrix; Hermitian
    inputs stay Hermitian.
    """
    t = _reshape_bipartite(as_matrix(m), dims)
    d1, d2 = dims
    if side == 1:
        out = t.transpose(2, 1, 0, 3)
    elif side == 2:
        out = t.transpose(0, 3, 2, 1)
    else:
        raise DimensionError(f"side must be 1 or 2, got {side}")
    return out.reshape(d1 * d2, d1 * d2)


@dataclass(frozen=True)
class Spectrum:
    """Full eigensystem of a Hermitian operator, eigenvalues descending.

    ``eigenvectors[:, k]`` is the unit eigenvector for ``eigenvalues[k]``.
    Within a degenerate cluster only the spanned subspace is meaningful.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ dagger(self.eigenvectors)


def eig_hermitian(a, herm_tol: float = HERM_TOL, eig_tol: float = EIG_TOL) -> Spectrum:
    """Eigendecompose a Hermitian operator; raises instead of returning junk."""
    m = ensure_hermitian(a, herm_tol)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed to converge: {exc}") from exc
    order = np.argsort(vals)[::-1]
    spec = Spectrum(eigenvalues=vals[order].copy(), eigenvectors=vecs[:, order].copy())
    resid = max_norm(spec.reconstruct() - m)
    if resid > eig_tol:
        raise NumericalError(f"eigendecomposition residual {resid:.3e} > {eig_tol:.3e}")
    return spec


@dataclass(frozen=True)
class PsdResult:
    """Outcome of a positive-semidefiniteness test with its witness."""

    is_psd: bool
    min_eigenvalue: float
    witness: np.ndarray

    def __bool__(self) -> bool:
        return self.is_psd


def is_psd(a, tol: float = EIG_TOL) -> PsdResult:
    """Test positivity; always reports the bottom eigenpair as witness."""
    spec = eig_hermitian(a)
    lam = float(spec.eigenvalues[-1])
    return PsdResult(is_psd=lam >= -tol, min_eigenvalue=lam, witness=spec.eigenvectors[:, -1].copy())


def _check_same_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"operand shapes differ: {a.shape} vs {b.shape}")


def anticommutator(a, b) -> np.ndarray:
    """{a, b} = ab + ba."""
    ma, mb = as_matrix(a), as_matrix(b)
    _check_same_dims(ma, mb)
    return ma @ mb + mb @ ma


def commutator(a, b) -> np.ndarray:
    """[a, b] = ab - ba."""
    ma, mb = as_matrix(a), as_matrix(b)
    _check_same_dims(ma, mb)
    return ma @ mb - mb @ ma


def jordan_product_pm(a, b, sign: int) -> np.ndarray:
    """The two associative products {a,b}/2 +- [a,b]/2.

    ``sign=+1`` recovers ``ab`` and ``sign=-1`` recovers ``ba``; the two
    choices carry opposite time orientations.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    ma, mb = as_matrix(a), as_matrix(b)
    _check_same_dims(ma, mb)
    return anticommutator(ma, mb) / 2.0 + sign * commutator(ma, mb) / 2.0


def unitary_exp(t: float, a) -> np.ndarray:
    """exp(i t a) for Hermitian a, computed through the eigendecomposition."""
    spec = eig_hermitian(a)
    phases = np.exp(1j * t * spec.eigenvalues)
    return (spec.eigenvectors * phases) @ dagger(spec.eigenvectors)


def conjugation_flow(t: float, a, b) -> np.ndarray:
    """One-parameter conjugation flow exp(ita) b exp(-ita).

    ``a`` is the Hermitian generator; ``b`` may be any matrix of the same
    dimension.  The flow is a group in ``t`` and preserves the spectrum of
    Hermitian ``b``.
    """
    ma, mb = as_matrix(a), as_matrix(b)
    _check_same_dims(ma, mb)
    u = unitary_exp(t, ma)
    return u @ mb @ dagger(u)
