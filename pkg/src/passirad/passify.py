"""Distance to passivity for non-passive models, and the stability analogue.

The backward-shifted family M_{-xi} = {A, B, C, D + xi*I} / (1 + xi) is
passive for all xi past some smallest value; that value is found by a
doubling-plus-bisection search and realized as the structured
perturbation Delta = (diag(0, xi*I) - xi*S) / (1 + xi) of the assembled
system matrix S, which maps M exactly onto M_{-xi}.  A fixed-certificate
LMI refinement then tries to shrink the perturbation norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ConvergenceError, DefinitenessError, DomainError
from .kernels import DEFAULT_TOL, Tolerances, as_complex_matrix, hermitian_eig, lambda_min
from .kyp import (
    Certificate,
    apply_perturbation,
    build_What,
    classify_certificate,
    perturbation_frame,
)
from .riccati import extremal_solutions
from .system_model import StateSpaceModel, validate_minimal
from .xi import ShiftDirection, frequency_scan, shift_model

__all__ = [
    "DistanceReport",
    "StabilityDistance",
    "constrained_distance",
    "pick_certificate",
    "refine_distance",
    "distance_to_stability",
    "analyze_distance",
]


@dataclass(frozen=True)
class DistanceReport:
    """Distance-to-passivity bundle: shift level, perturbations, norms."""

    xi_big: float
    delta_constrained: np.ndarray
    X_cert: Certificate
    delta_refined: Optional[np.ndarray]
    sigma2: float
    sigma_frob: float
    refinement_converged: bool


@dataclass(frozen=True)
class StabilityDistance:
    """Smallest uniform shrink making A/(1+xi) stable."""

    xi: float
    attained: bool
    relative_error: float
    spectral_radius: float


def _backward_passive(model: StateSpaceModel, xi: float, tol: Tolerances) -> bool:
    shifted = shift_model(model, xi, ShiftDirection.BACKWARD).model
    return frequency_scan(shifted, tol).passive


def constrained_distance(
    model: StateSpaceModel,
    tau: float = DEFAULT_TOL.bisect_tau,
    tol: Tolerances = DEFAULT_TOL,
) -> Tuple[float, np.ndarray]:
    """Smallest backward shift making the model passive, with its
    realizing perturbation of the system matrix.

    Returns (0, 0) for an already-passive model.  Otherwise brackets the
    shift by doubling, bisects the monotone passivity predicate to width
    tau, and returns the certified-passing bracket end.
    """
    report = validate_minimal(model, tol)
    if not report.minimal:
        raise DomainError(
            "model is not minimal "
            f"(controllable rank {report.ctrl_rank}, observable rank {report.obs_rank})"
        )
    t = float(tau)
    if not (np.isfinite(t) and t > 0.0):
        raise DomainError(f"tau must be finite and > 0, got {tau}")
    nm = model.n + model.m
    if frequency_scan(model, tol).passive:
        return 0.0, np.zeros((nm, nm), dtype=np.complex128)
    rho_a = float(np.max(np.abs(np.linalg.eigvals(model.A))))
    lo = 0.0
    hi = max(t, rho_a - 1.0 + t)
    doublings = 0
    while not _backward_passive(model, hi, tol):
        lo = hi
        hi *= 2.0
        doublings += 1
        if doublings > 80:
            raise ConvergenceError(f"no passive backward shift found up to {hi:.3e}")
    while hi - lo > t:
        mid = 0.5 * (lo + hi)
        if _backward_passive(model, mid, tol):
            hi = mid
        else:
            lo = mid
    xi_big = hi
    S = model.system_matrix()
    target = np.zeros((nm, nm), dtype=np.complex128)
    target[model.n :, model.n :] = xi_big * np.eye(model.m)
    delta = (target - xi_big * S) / (1.0 + xi_big)
    return float(xi_big), delta


def pick_certificate(
    model: StateSpaceModel,
    xi_big: float,
    tau: float = DEFAULT_TOL.bisect_tau,
    tol: Tolerances = DEFAULT_TOL,
) -> Certificate:
    """Certificate for the passified model: the stabilizing solution of
    the strictly passive side M_{-(xi+tau)}, or the extremal midpoint
    when no shift was needed."""
    x = float(xi_big)
    if x > 0.0:
        shifted = shift_model(model, x + float(tau), ShiftDirection.BACKWARD).model
        sols = extremal_solutions(shifted, tol)
        return classify_certificate(shifted, sols.X_min, tol)
    sols = extremal_solutions(model, tol)
    return classify_certificate(model, 0.5 * (sols.X_min + sols.X_max), tol)


def _norm_of(delta: np.ndarray, norm: str) -> float:
    if norm == "fro":
        return float(np.linalg.norm(delta, "fro"))
    return float(np.linalg.norm(delta, 2))


def _ball_projection(delta: np.ndarray, sigma: float, norm: str) -> np.ndarray:
    if norm == "fro":
        nrm = np.linalg.norm(delta, "fro")
        if nrm <= sigma or nrm == 0.0:
            return delta
        return delta * (sigma / nrm)
    U, s, V = np.linalg.svd(delta, full_matrices=False)
    return (U * np.minimum(s, sigma)) @ V.conj().T


def _psd_readback(
    delta: np.ndarray, What0: np.ndarray, frame, n: int, tol: Tolerances
) -> np.ndarray:
    """Clip the assembled certificate matrix to the PSD cone and read the
    perturbation blocks back through the embedding frame."""
    G = What0 + apply_perturbation(frame, delta)
    w, V = hermitian_eig(G, tol)
    Gplus = (V * np.maximum(w, 0.0)) @ V.conj().T
    diff = Gplus - What0
    nm = delta.shape[0]
    m = nm - n
    out = np.zeros_like(delta)
    out[:n, :n] = diff[:n, n : 2 * n]
    out[:n, n:] = diff[:n, 2 * n :]
    out[n:, :n] = diff[2 * n :, n : 2 * n]
    out[n:, n:] = 0.5 * diff[2 * n :, 2 * n :]
    return out


def refine_distance(
    model: StateSpaceModel,
    X,
    delta0: np.ndarray,
    norm: str = "2",
    budget: int = 2000,
    tol: Tolerances = DEFAULT_TOL,
    feas_tol: Optional[float] = None,
) -> Tuple[np.ndarray, float, bool]:
    """Shrink a feasible perturbation at a fixed certificate.

    Bisects the norm level sigma and tests each level for a Delta with
    ||Delta|| <= sigma keeping the bordered certificate matrix PSD, via
    alternating projections with Dykstra corrections (norm ball one way,
    eigenvalue clipping plus block readback the other).  Never returns a
    worse perturbation than delta0; converged=False flags a stalled
    search with the best feasible point so far.
    """
    if norm not in ("2", "fro"):
        raise DomainError(f"norm must be '2' or 'fro', got {norm!r}")
    delta0 = as_complex_matrix(delta0, "delta0")
    nm = model.n + model.m
    if delta0.shape != (nm, nm):
        raise DomainError(f"delta0 must be {nm}x{nm}, got {delta0.shape}")
    frame = perturbation_frame(model.n, model.m)
    What0 = build_What(model, X, tol)
    scale = max(1.0, float(np.linalg.norm(What0, 2)))
    band = (max(tol.psd_tol, 10.0 * tol.bisect_tau) if feas_tol is None else float(feas_tol)) * scale

    def defect(delta: np.ndarray) -> float:
        return -min(0.0, lambda_min(What0 + apply_perturbation(frame, delta), tol))

    if defect(delta0) > band:
        raise DomainError(
            f"starting perturbation is infeasible (PSD defect {defect(delta0):.3e} > {band:.3e})"
        )
    sigma0 = _norm_of(delta0, norm)
    if sigma0 == 0.0:
        return delta0, 0.0, True

    def try_level(sigma: float, start: np.ndarray, sweeps: int) -> Tuple[Optional[np.ndarray], int]:
        x = _ball_projection(start, sigma, norm)
        p = np.zeros_like(x)
        q = np.zeros_like(x)
        best_defect = np.inf
        stall = 0
        used = 0
        for _ in range(sweeps):
            used += 1
            y = _ball_projection(x + p, sigma, norm)
            p = x + p - y
            d = defect(y)
            if d <= band:
                return y, used
            if d < best_defect - 1e-12:
                best_defect = d
                stall = 0
            else:
                stall += 1
                if stall >= 50:
                    break
            z = _psd_readback(y + q, What0, frame, model.n, tol)
            q = y + q - z
            x = z
        return None, used

    lo, hi = 0.0, sigma0
    best = delta0
    remaining = int(budget)
    converged = True
    while hi - lo > max(1e-3 * sigma0, 1e-12):
        if remaining <= 0:
            converged = False
            break
        mid = 0.5 * (lo + hi)
        candidate, used = try_level(mid, best, min(300, remaining))
        remaining -= used
        if candidate is not None:
            hi = mid
            best = candidate
        else:
            lo = mid
    if defect(best) > band or _norm_of(best, norm) > sigma0 + band:
        return delta0, sigma0, False
    return best, _norm_of(best, norm), converged


def distance_to_stability(
    A, tau: float = DEFAULT_TOL.bisect_tau, tol: Tolerances = DEFAULT_TOL
) -> StabilityDistance:
    """Infimal xi >= 0 with A/(1+xi) stable: max(0, rho(A) - 1).

    The infimum is attained iff the peripheral eigenvalues are
    semi-simple; the uniform shrink has relative error xi/(1+xi).
    """
    M = as_complex_matrix(A, "A")
    if M.shape[0] != M.shape[1]:
        raise DomainError(f"A must be square, got {M.shape}")
    eigs = np.linalg.eigvals(M)
    rho = float(np.max(np.abs(eigs)))
    xi = max(0.0, rho - 1.0)
    if rho < 1.0 - tol.circle_tol:
        return StabilityDistance(0.0, True, 0.0, rho)
    # defective eigenvalues split numerically by roughly eps^(1/order), so
    # cluster and rank thresholds must be at least that coarse
    ctol = max(1e-8, 10.0 * np.finfo(float).eps ** (1.0 / M.shape[0])) * max(rho, 1.0)
    peripheral = eigs[np.abs(np.abs(eigs) - rho) <= ctol]
    semi_simple = True
    handled = np.zeros(peripheral.shape[0], dtype=bool)
    for i in range(peripheral.shape[0]):
        if handled[i]:
            continue
        cluster = np.abs(peripheral - peripheral[i]) <= ctol
        handled |= cluster
        alg = int(np.count_nonzero(cluster))
        lam = complex(np.mean(peripheral[cluster]))
        s = np.linalg.svd(M - lam * np.eye(M.shape[0]), compute_uv=False)
        thresh = max(tol.rank_tol * max(s[0], 1.0), 10.0 * ctol)
        rank = int(np.count_nonzero(s > thresh))
        geo = M.shape[0] - rank
        if geo < alg:
            semi_simple = False
            break
    return StabilityDistance(xi, semi_simple, xi / (1.0 + xi), rho)


def analyze_distance(
    model: StateSpaceModel,
    tau: float = DEFAULT_TOL.bisect_tau,
    norm: str = "2",
    budget: int = 2000,
    tol: Tolerances = DEFAULT_TOL,
) -> DistanceReport:
    """Full distance-to-passivity pipeline: constrained shift, certificate,
    and norm refinement."""
    xi_big, delta0 = constrained_distance(model, tau, tol)
    cert = pick_certificate(model, xi_big, tau, tol)
    if xi_big == 0.0:
        return DistanceReport(0.0, delta0, cert, None, 0.0, 0.0, True)
    base = cert.X
    refined, achieved, converged = refine_distance(
        model, base, delta0, norm=norm, budget=budget, tol=tol
    )
    return DistanceReport(
        xi_big=xi_big,
        delta_constrained=delta0,
        X_cert=cert,
        delta_refined=refined,
        sigma2=float(np.linalg.norm(refined, 2)),
        sigma_frob=float(np.linalg.norm(refined, "fro")),
        refinement_converged=converged,
    )
