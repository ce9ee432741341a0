"""Dense linear-algebra kernels and the shared tolerance bundle.

Every eigenvalue / singular value / Cholesky query in the package goes
through these wrappers so that validation, ordering conventions and
error types are uniform.  All extreme-eigenvalue queries use full
Hermitian eigendecompositions: the matrices are small and simplicity
wins over iterative shortcuts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import DefinitenessError, DomainError

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "as_complex_matrix",
    "hermitian_part",
    "hermitian_eig",
    "lambda_min",
    "lambda_max",
    "spectral_norm",
    "svd",
    "cholesky",
    "golden_section_min",
]

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0  # 1/phi, golden bracket shrink factor


@dataclass(frozen=True)
class Tolerances:
    """Tolerance bundle threaded through all numerical decisions.

    rank_tol    relative singular-value cutoff for rank decisions
    psd_tol     relative dead band for definiteness classification
    eig_tol     relative clustering width for eigenvalue multiplicity
    circle_tol  dead band around the unit circle for pencil eigenvalues
    golden_tol  absolute bracket width for golden-section termination
    bisect_tau  absolute bracket width for bisection termination
    """

    rank_tol: float = 1e-10
    psd_tol: float = 1e-10
    eig_tol: float = 1e-12
    circle_tol: float = 1e-8
    golden_tol: float = 1e-10
    bisect_tau: float = 1e-8

    def __post_init__(self):
        for name in (
            "rank_tol",
            "psd_tol",
            "eig_tol",
            "circle_tol",
            "golden_tol",
            "bisect_tau",
        ):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise DomainError(f"tolerance {name} must be finite and > 0, got {value}")


DEFAULT_TOL = Tolerances()


def as_complex_matrix(M, name="matrix") -> np.ndarray:
    """Validate and return a finite 2-D complex128 copy of ``M``."""
    A = np.array(M, dtype=np.complex128, copy=True)
    if A.ndim != 2:
        raise DomainError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise DomainError(f"{name} has non-finite entries")
    return A


def hermitian_part(M) -> np.ndarray:
    """Return (M + M^H)/2."""
    A = as_complex_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DomainError(f"hermitian_part needs a square matrix, got {A.shape}")
    return 0.5 * (A + A.conj().T)


def _check_hermitian(H, tol: Tolerances, name="matrix") -> np.ndarray:
    A = as_complex_matrix(H, name)
    if A.shape[0] != A.shape[1]:
        raise DomainError(f"{name} must be square, got {A.shape}")
    scale = max(np.abs(A).max(), 1.0)
    skew = np.abs(A - A.conj().T).max()
    if skew > 1e-8 * scale:
        raise DomainError(f"{name} is not Hermitian: asymmetry {skew:.3e} at scale {scale:.3e}")
    return 0.5 * (A + A.conj().T)


def hermitian_eig(H, tol: Tolerances = DEFAULT_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, V) with real eigenvalues ``w`` ascending and orthonormal
    columns of ``V``, such that H V = V diag(w).
    """
    A = _check_hermitian(H, tol, "hermitian_eig input")
    w, V = np.linalg.eigh(A)
    return w, V


def lambda_min(H, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    w, _ = hermitian_eig(H, tol)
    return float(w[0])


def lambda_max(H, tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest eigenvalue of a Hermitian matrix."""
    w, _ = hermitian_eig(H, tol)
    return float(w[-1])


def spectral_norm(M) -> float:
    """Largest singular value; 0.0 for an empty matrix."""
    A = as_complex_matrix(M, "spectral_norm input")
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def svd(M) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition M = U diag(s) V^H.

    Returns (U, s, V) with ``s`` nonnegative descending and V the matrix
    of right singular vectors (not its conjugate transpose).
    """
    A = as_complex_matrix(M, "svd input")
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    return U, s, Vh.conj().T


def cholesky(H, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Upper-triangular factor T with positive real diagonal and H = T^H T.

    Raises DefinitenessError (carrying lambda_min) when H is not positive
    definite beyond the psd_tol dead band.
    """
    A = _check_hermitian(H, tol, "cholesky input")
    scale = max(spectral_norm(A), 1.0)
    lam = lambda_min(A, tol)
    if lam <= tol.psd_tol * scale:
        raise DefinitenessError(
            f"matrix is not positive definite: lambda_min = {lam:.6e} "
            f"(threshold {tol.psd_tol * scale:.6e})",
            lambda_min=lam,
        )
    L = np.linalg.cholesky(A)
    return L.conj().T


def golden_section_min(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol_width: float,
) -> Tuple[float, float, int]:
    """Golden-section minimization of a unimodal scalar function on [a, b].

    Shrinks the bracket by the golden ratio until its width is at most
    ``tol_width``.  Returns (x_best, f_best, evaluation_count); the number
    of evaluations is O(log((b - a) / tol_width)).
    """
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise DomainError(f"invalid bracket [{a}, {b}]")
    if not (np.isfinite(tol_width) and tol_width > 0.0):
        raise DomainError(f"invalid tolerance {tol_width}")

    evals = 0

    def call(x: float) -> float:
        nonlocal evals
        evals += 1
        return float(f(x))

    lo, hi = float(a), float(b)
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = call(c), call(d)
    while hi - lo > tol_width:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = call(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = call(d)
    if fc <= fd:
        return c, fc, evals
    return d, fd, evals
