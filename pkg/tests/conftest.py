import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile(
    "numeric",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.load_profile("numeric")


PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@pytest.fixture
def pauli():
    return PAULI_X, PAULI_Y, PAULI_Z


def random_hermitian(d: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2.0


def unit_trace_hermitian(d: int, seed: int) -> np.ndarray:
    """Random Hermitian rescaled to unit trace by an identity shift; generically not PSD."""
    g = random_hermitian(d, seed)
    return g + (1.0 - g.trace().real) / d * np.eye(d)
