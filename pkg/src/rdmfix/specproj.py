"""Nearest symmetric positive semidefinite matrices, with an optional trace constraint.

The unconstrained problem is solved by clipping the negative eigenvalues of
the symmetric part (Higham's positive approximant).  With ``Tr B = T`` imposed
the minimiser keeps the eigenvectors and replaces every eigenvalue by
``max(lambda_i - sigma0, 0)``, where ``sigma0`` is the root of

    f(sigma) = sum_i max(lambda_i - sigma, 0) = T.

``f`` is convex, piecewise linear and nonincreasing, so the root is bracketed by
``[lambda_min - T, lambda_max]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, NumericalError

STRATEGIES = ("bisection", "zero_and_shift")

_F_RTOL = 1e-12
_BRACKET_ATOL = 1e-14
_MAX_BISECTIONS = 400
_MAX_ALTERNATIONS = 500
_ALTERNATION_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs of a symmetric matrix, eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def rebuild(self, values: np.ndarray | None = None) -> np.ndarray:
        lam = self.eigenvalues if values is None else np.asarray(values, dtype=float)
        u = self.eigenvectors
        out = (u * lam) @ u.T
        return 0.5 * (out + out.T)


@dataclass(frozen=True)
class ShiftResult:
    sigma0: float
    shifted_eigenvalues: np.ndarray
    iterations: int


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def symmetrize(m) -> np.ndarray:
    """Return ``(M + M^T) / 2``."""
    a = _as_square(m)
    return 0.5 * (a + a.T)


def spectrum(m) -> Spectrum:
    """Eigendecomposition of the symmetric part of ``m``."""
    a = symmetrize(m)
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    try:
        lam, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return Spectrum(lam[::-1].copy(), u[:, ::-1].copy())


def shift_function(eigenvalues, sigma) -> np.ndarray | float:
    """Evaluate ``f(sigma) = sum_i max(lambda_i - sigma, 0)``; vectorised over sigma."""
    lam = np.asarray(eigenvalues, dtype=float)
    s = np.asarray(sigma, dtype=float)
    val = np.maximum(lam - s[..., None], 0.0).sum(axis=-1)
    return float(val) if np.ndim(val) == 0 else val


def _check_target(eigenvalues, trace) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=float).ravel()
    if lam.size == 0:
        raise DimensionError("empty eigenvalue vector")
    if trace < 0:
        raise DomainError(f"trace target must be nonnegative, got {trace}")
    return lam


def shift_root(eigenvalues, trace: float) -> ShiftResult:
    """Find ``sigma0`` with ``f(sigma0) = trace`` by bisection.

    After the bracket has shrunk, sigma0 is recomputed in closed form on the
    linear piece it lies in, so the trace of the shifted eigenvalues is exact
    up to rounding.
    """
    lam = _check_target(eigenvalues, trace)
    lmax = float(lam.max())
    if trace == 0:
        return ShiftResult(lmax, np.zeros_like(lam), 0)

    lo, hi = float(lam.min()) - trace, lmax
    tol = _F_RTOL * max(1.0, trace)
    sigma = lo
    it = 0
    while it < _MAX_BISECTIONS:
        it += 1
        sigma = 0.5 * (lo + hi)
        resid = shift_function(lam, sigma) - trace
        if abs(resid) <= tol or hi - lo <= _BRACKET_ATOL:
            break
        if resid > 0:
            lo = sigma
        else:
            hi = sigma

    # polish on the active set; accept only if it stays on the same piece
    active = lam > sigma
    if active.any():
        exact = (lam[active].sum() - trace) / active.sum()
        if np.array_equal(lam > exact, active) or abs(exact - sigma) <= 1e-9 * max(1.0, abs(sigma)):
            sigma = float(exact)
    shifted = np.maximum(lam - sigma, 0.0)
    return ShiftResult(float(sigma), shifted, it)


def zero_and_shift(eigenvalues, trace: float) -> ShiftResult:
    """Alternate a uniform shift to the trace target with clipping of negatives.

    Eigenvalues clipped to zero are frozen; the shift is then spread over the
    survivors only.  The first move is a shift, not a clip: clipping first can
    discard eigenvalues that the constrained optimum keeps when the trace has
    to grow.
    """
    lam = _check_target(eigenvalues, trace)
    if trace == 0:
        return ShiftResult(float(lam.max()), np.zeros_like(lam), 0)
    alive = np.ones(lam.size, dtype=bool)
    y = lam.copy()
    sigma = 0.0
    it = 0
    for it in range(1, _MAX_ALTERNATIONS + 1):
        sigma = (lam[alive].sum() - trace) / alive.sum()
        y = np.where(alive, lam - sigma, 0.0)
        negative = y < 0
        if not negative.any():
            break
        alive &= ~negative
        y[negative] = 0.0
        if max(abs(y.sum() - trace), -y.min()) <= _ALTERNATION_TOL:
            break
    return ShiftResult(float(sigma), np.maximum(y, 0.0), it)


def project_psd(m) -> np.ndarray:
    """Nearest symmetric PSD matrix in the Frobenius norm (no trace constraint)."""
    spec = spectrum(m)
    return spec.rebuild(np.maximum(spec.eigenvalues, 0.0))


def project_psd_trace(m, trace: float | None = None, strategy: str = "bisection") -> np.ndarray:
    """Nearest symmetric PSD matrix with trace ``trace`` (Frobenius norm).

    Without ``trace`` this is :func:`project_psd`.  ``strategy`` selects how
    the eigenvalue shift is found; both converge to the same matrix.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if trace is None:
        return project_psd(m)
    if trace < 0:
        raise DomainError(f"trace target must be nonnegative, got {trace}")
    spec = spectrum(m)
    if trace == 0:
        return np.zeros_like(spec.eigenvectors)
    solver = shift_root if strategy == "bisection" else zero_and_shift
    res = solver(spec.eigenvalues, trace)
    return spec.rebuild(res.shifted_eigenvalues)


def project_simplex(values, total: float) -> np.ndarray:
    """Euclidean projection of a vector onto ``{x >= 0, sum(x) = total}``."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return v.copy()
    return shift_root(v.ravel(), total).shifted_eigenvalues.reshape(v.shape)
