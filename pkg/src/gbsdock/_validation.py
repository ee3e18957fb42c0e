"""Input validation helpers used across modules and by the estimator layer."""

from __future__ import annotations

import numpy as np

from .exceptions import ValidationError


def as_rng(seed: int | np.random.Generator) -> np.random.Generator:
    """Coerce an integer seed (or an existing Generator) to a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)):
        return np.random.default_rng(int(seed))
    raise ValidationError(f"seed must be an int or numpy Generator, got {type(seed).__name__}")


def readonly(a: np.ndarray) -> np.ndarray:
    """Return a C-contiguous float64 copy with the writeable flag cleared."""
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out is a:
        out = out.copy()
    out.flags.writeable = False
    return out


def check_square(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def check_symmetric(a: np.ndarray, name: str, tol: float = 1e-9) -> np.ndarray:
    a = check_square(a, name)
    if a.size and np.max(np.abs(a - a.T)) > tol:
        raise ValidationError(f"{name} is not symmetric within {tol}")
    return a


def check_adjacency(a: np.ndarray) -> np.ndarray:
    """Validate a dense 0/1 adjacency matrix: symmetric, zero diagonal."""
    a = check_square(a, "adjacency")
    if a.shape[0] < 1:
        raise ValidationError("adjacency must have at least one vertex")
    if not np.array_equal(a, a.T):
        raise ValidationError("adjacency must be symmetric")
    if not np.all((a == 0.0) | (a == 1.0)):
        raise ValidationError("adjacency entries must be 0 or 1")
    if np.any(np.diag(a) != 0.0):
        raise ValidationError("adjacency diagonal must be zero (no self-loops)")
    return a


def check_vertex_weights(w, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if w.shape[0] != n:
        raise ValidationError(f"expected {n} vertex weights, got {w.shape[0]}")
    if not np.all(np.isfinite(w)):
        raise ValidationError("vertex weights must be finite")
    if np.any(w < 0.0):
        raise ValidationError("vertex weights must be non-negative")
    return w


def check_positive(x: float, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x <= 0.0:
        raise ValidationError(f"{name} must be positive and finite, got {x}")
    return x


def check_non_negative(x: float, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x < 0.0:
        raise ValidationError(f"{name} must be non-negative and finite, got {x}")
    return x


def check_count(x, name: str, minimum: int = 1) -> int:
    if not isinstance(x, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer, got {type(x).__name__}")
    x = int(x)
    if x < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {x}")
    return x
