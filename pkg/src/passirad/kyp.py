"""Passivity certificate matrices and their classification.

For a model {A, B, C, D} and a Hermitian candidate X the certificate
matrix is

    W(X) = [ X - A^H X A      C^H - A^H X B ]
           [ C - B^H X A      D^H + D - B^H X B ]

X > 0 with W(X) >= 0 certifies passivity; W(X) > 0 certifies strict
passivity.  Two bordered forms of the same certificate are used by the
radius and margin computations:

    What(X)   = [[X^{-1}, A, B], [A^H, X, C^H], [B^H, C, D^H + D]]
    Wtilde(X) = [[X, XA, XB], [A^H X, X, C^H], [B^H X, C, D^H + D]]

Wtilde = diag(X, I, I) What diag(X, I, I), and the Schur complement of
the leading block of Wtilde is W(X).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError
from .kernels import (
    DEFAULT_TOL,
    Tolerances,
    as_complex_matrix,
    hermitian_eig,
    hermitian_part,
    spectral_norm,
)
from .system_model import StateSpaceModel

__all__ = [
    "CertificateKind",
    "Certificate",
    "PerturbationFrame",
    "build_W",
    "build_What",
    "build_Wtilde",
    "perturbation_frame",
    "apply_perturbation",
    "classify_certificate",
]


class CertificateKind(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Certificate:
    """Classification of a candidate X against the certificate LMI."""

    X: np.ndarray
    kind: CertificateKind
    lambda_min_W: float
    lambda_min_X: float


def _check_X(model: StateSpaceModel, X) -> np.ndarray:
    Xh = hermitian_part(as_complex_matrix(np.atleast_2d(X), "X"))
    if Xh.shape != (model.n, model.n):
        raise DomainError(f"X must be {model.n}x{model.n}, got {Xh.shape}")
    return Xh


def build_W(model: StateSpaceModel, X, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The (n+m) certificate matrix W(X), exactly Hermitian."""
    Xh = _check_X(model, X)
    A, B, C, D = model.A, model.B, model.C, model.D
    XA = Xh @ A
    XB = Xh @ B
    top_left = Xh - A.conj().T @ XA
    top_right = C.conj().T - A.conj().T @ XB
    bottom_right = D.conj().T + D - B.conj().T @ XB
    W = np.block([[top_left, top_right], [top_right.conj().T, bottom_right]])
    return hermitian_part(W)


def build_What(model: StateSpaceModel, X, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The bordered (2n+m) form with an X^{-1} leading block (needs X > 0)."""
    Xh = _check_X(model, X)
    try:
        Xinv = np.linalg.inv(Xh)
    except np.linalg.LinAlgError as exc:
        raise DomainError("X is singular; the bordered certificate needs X > 0") from exc
    A, B, C, D = model.A, model.B, model.C, model.D
    What = np.block(
        [
            [Xinv, A, B],
            [A.conj().T, Xh, C.conj().T],
            [B.conj().T, C, D.conj().T + D],
        ]
    )
    return hermitian_part(What)


def build_Wtilde(model: StateSpaceModel, X, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The inversion-free bordered (2n+m) form, congruent to diag(X, W(X))."""
    Xh = _check_X(model, X)
    A, B, C, D = model.A, model.B, model.C, model.D
    Wt = np.block(
        [
            [Xh, Xh @ A, Xh @ B],
            [A.conj().T @ Xh, Xh, C.conj().T],
            [B.conj().T @ Xh, C, D.conj().T + D],
        ]
    )
    return hermitian_part(Wt)


@dataclass(frozen=True)
class PerturbationFrame:
    """Embedding frame for structured perturbations of the bordered certificate.

    E1 places a block Delta (acting on [x; u]) into rows {1..n, 2n+1..2n+m};
    E2 places it into rows {n+1..2n, 2n+1..2n+m}.  The weighted frame
    Ds [E1 E2] has orthonormal rows.
    """

    E1: np.ndarray
    E2: np.ndarray
    Ds: np.ndarray
    n: int
    m: int


def perturbation_frame(n: int, m: int) -> PerturbationFrame:
    if n < 1 or m < 1:
        raise DomainError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    E1 = np.zeros((2 * n + m, n + m))
    E2 = np.zeros((2 * n + m, n + m))
    E1[:n, :n] = np.eye(n)
    E1[2 * n :, n:] = np.eye(m)
    E2[n : 2 * n, :n] = np.eye(n)
    E2[2 * n :, n:] = np.eye(m)
    Ds = np.diag(np.concatenate([np.ones(2 * n), np.full(m, 1.0 / np.sqrt(2.0))]))
    return PerturbationFrame(E1=E1, E2=E2, Ds=Ds, n=n, m=m)


def apply_perturbation(frame: PerturbationFrame, delta) -> np.ndarray:
    """Hermitian update E1 Delta E2^T + E2 Delta^H E1^T of the bordered certificate.

    With Delta = [[dA, dB], [dC, dD]] this equals the exact change of
    What(X, .) under {A, B, C, D} -> {A + dA, B + dB, C + dC, D + dD}.
    """
    Delta = as_complex_matrix(delta, "delta")
    k = frame.n + frame.m
    if Delta.shape != (k, k):
        raise DomainError(f"delta must be {k}x{k}, got {Delta.shape}")
    P = frame.E1 @ Delta @ frame.E2.T
    return P + P.conj().T


def classify_certificate(
    model: StateSpaceModel, X, tol: Tolerances = DEFAULT_TOL
) -> Certificate:
    """Classify X against the certificate LMI with a psd_tol dead band.

    Interior:  X > 0 and lambda_min W(X) >  psd_tol * ||W||
    Boundary:  X > 0 and |lambda_min W(X)| <= psd_tol * ||W||
    Outside:   anything else
    """
    Xh = _check_X(model, X)
    W = build_W(model, Xh, tol)
    wmin = float(hermitian_eig(W, tol)[0][0])
    xmin = float(hermitian_eig(Xh, tol)[0][0])
    w_scale = max(spectral_norm(W), 1.0)
    x_scale = max(spectral_norm(Xh), 1.0)
    x_pd = xmin > tol.psd_tol * x_scale
    if x_pd and wmin > tol.psd_tol * w_scale:
        kind = CertificateKind.INTERIOR
    elif x_pd and abs(wmin) <= tol.psd_tol * w_scale:
        kind = CertificateKind.BOUNDARY
    else:
        kind = CertificateKind.OUTSIDE
    return Certificate(X=Xh, kind=kind, lambda_min_W=wmin, lambda_min_X=xmin)
