"""Input validation helpers shared by the builders and the estimators."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.utils.validation import check_array

HERMITIAN_ATOL = 1e-12


def check_spin(s) -> Fraction:
    """Return ``s`` as an exact Fraction, rejecting anything but half-integers >= 0."""
    try:
        twice = Fraction(s).limit_denominator(1000) * 2
    except (TypeError, ValueError) as exc:
        raise ValueError(f"spin must be a real number, got {s!r}") from exc
    if twice.denominator != 1 or abs(float(twice) - 2 * float(s)) > 1e-12:
        raise ValueError(f"2s must be an integer, got s={s!r}")
    if twice < 0:
        raise ValueError(f"spin must be non-negative, got s={s!r}")
    return twice / 2


def check_square(mat, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    return arr


def check_hermitian(mat, name: str = "matrix", atol: float = HERMITIAN_ATOL) -> np.ndarray:
    arr = check_square(mat, name)
    dev = float(np.max(np.abs(arr - arr.conj().T), initial=0.0))
    if dev > atol:
        raise ValueError(f"{name} is not Hermitian (max deviation {dev:.3e})")
    return arr


def check_energies(X) -> np.ndarray:
    """Coerce kinetic energies to a 1-D float array.

    Accepts a scalar, a 1-D sequence, or an ``(n, 1)`` column as produced by
    scikit-learn pipelines.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, ensure_2d=True, dtype=float)
    if arr.shape[1] != 1:
        raise ValueError(
            f"expected a single column of kinetic energies, got {arr.shape[1]} columns"
        )
    return arr[:, 0]
