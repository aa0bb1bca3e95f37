"""JSON wire formats used by the CLI and shared across modules.

A matrix travels as ``{"dims": [rows, cols], "re": [...], "im": [...]}`` with
row-major real/imaginary parts.  Python's float repr is shortest-round-trip,
so values survive a JSON round trip at full double precision.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .errors import InvalidInput


def matrix_to_json(m: np.ndarray) -> dict[str, Any]:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise InvalidInput(f"expected a 2-D matrix, got ndim={a.ndim}")
    return {
        "dims": [int(a.shape[0]), int(a.shape[1])],
        "re": a.real.ravel().tolist(),
        "im": a.imag.ravel().tolist(),
    }


def matrix_from_json(obj: dict[str, Any]) -> np.ndarray:
    try:
        rows, cols = (int(x) for x in obj["dims"])
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj["im"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed matrix object: {exc}") from exc
    if re.size != rows * cols or im.size != rows * cols:
        raise InvalidInput(f"matrix entry count {re.size}/{im.size} does not match dims {rows}x{cols}")
    return (re + 1j * im).reshape(rows, cols)


def vector_to_json(v: np.ndarray) -> dict[str, Any]:
    a = np.asarray(v, dtype=np.complex128).ravel()
    return {"dims": [int(a.size)], "re": a.real.tolist(), "im": a.imag.tolist()}


def vector_from_json(obj: dict[str, Any]) -> np.ndarray:
    try:
        (n,) = (int(x) for x in obj["dims"])
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj["im"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed vector object: {exc}") from exc
    if re.size != n or im.size != n:
        raise InvalidInput("vector entry count does not match dims")
    return re + 1j * im


def pvm_to_json(elements) -> list[dict[str, Any]]:
    return [matrix_to_json(p) for p in elements]


def pvm_from_json(obj) -> list[np.ndarray]:
    return [matrix_from_json(p) for p in obj]


def state_to_json(rho: np.ndarray, factor_dims: tuple[int, int] | None = None) -> dict[str, Any]:
    """Matrix JSON, optionally annotated with the bipartite factor split."""
    out = matrix_to_json(rho)
    if factor_dims is not None:
        out["factor_dims"] = [int(factor_dims[0]), int(factor_dims[1])]
    return out


def state_from_json(obj: dict[str, Any]) -> tuple[np.ndarray, tuple[int, int] | None]:
    rho = matrix_from_json(obj)
    dims = obj.get("factor_dims")
    if dims is not None:
        dims = (int(dims[0]), int(dims[1]))
    return rho, dims


def infer_factor_dims(total: int, dims: tuple[int, int] | None) -> tuple[int, int]:
    """Resolve factor dimensions, defaulting to a square split."""
    if dims is not None:
        d1, d2 = dims
        if d1 * d2 != total:
            raise InvalidInput(f"factor dims {dims} do not multiply to {total}")
        return (int(d1), int(d2))
    root = int(round(total**0.5))
    if root * root != total:
        raise InvalidInput(f"cannot infer a square factor split of dimension {total}; pass explicit dims")
    return (root, root)
