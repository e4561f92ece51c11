"""Symmetric eigensolver, Cholesky, ridge and the two-step generalized solver."""

from dataclasses import dataclass

import numpy as np

DEFAULT_RHO = 1e-6
RIDGE_RETRY_FACTOR = 100.0
# Eigenvalues of S_w below this fraction of the largest are clamped before
# taking the inverse square root.
EIG_FLOOR = 1e-12
# S_w is rejected when its smallest eigenvalue is at most this times the trace.
PD_TOL = 1e-14


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a matrix that must be positive definite is not."""


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray


def _square(s, name="matrix"):
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"{name} must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError(f"{name} has non-finite entries")
    return s


def symmetrize(s):
    return 0.5 * (s + s.T)


def canonical_signs(vectors, tol=1e-12):
    """Flip columns so the first entry with magnitude > ``tol`` is positive."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    big = np.abs(vectors) > tol
    has = big.any(axis=0)
    first = np.argmax(big, axis=0)
    lead = vectors[first, np.arange(vectors.shape[1])]
    flip = has & (lead < 0)
    vectors[:, flip] *= -1.0
    return vectors


def sym_eig(s):
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are sorted descending (stable, so ties keep LAPACK's order)
    and eigenvector signs are canonicalized.
    """
    s = symmetrize(_square(s))
    values, vectors = np.linalg.eigh(s)
    order = np.argsort(-values, kind="stable")
    return EigenResult(values[order], canonical_signs(vectors[:, order]))


def cholesky_lower(s):
    """Lower Cholesky factor ``L`` with ``s = L @ L.T``."""
    s = symmetrize(_square(s))
    try:
        lower = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    # LAPACK accepts matrices that are singular to rounding; a vanishing pivot
    # means the factor is meaningless
    if np.min(np.diag(lower)) ** 2 <= PD_TOL * max(np.trace(s), np.finfo(float).tiny):
        raise NotPositiveDefiniteError("matrix is numerically singular")
    return lower


def regularize(s, rho):
    """Return ``s + rho * (trace(s)/d) * I`` (``s + rho * I`` if the trace is 0)."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    s = _square(s)
    d = s.shape[0]
    scale = np.trace(s) / d
    if scale == 0:
        scale = 1.0
    return s + rho * scale * np.eye(d)


def whitened_eig(s_b, s_w):
    """Full two-step solution of ``S_b w = lambda S_w w``.

    Diagonalize ``S_w = H diag(lam) H^T``, whiten with ``P = H lam^{-1/2}``,
    diagonalize ``P^T S_b P = Z diag(e) Z^T``; the solution is ``P Z``.

    Returns
    -------
    EigenResult
        ``values`` are the generalized eigenvalues (descending), ``vectors``
        the full ``d x d`` projection ``P Z``.
    """
    s_b = symmetrize(_square(s_b, "s_b"))
    s_w = symmetrize(_square(s_w, "s_w"))
    if s_b.shape != s_w.shape:
        raise ValueError(f"s_b {s_b.shape} and s_w {s_w.shape} differ in shape")
    within = sym_eig(s_w)
    lam = within.values
    trace = np.trace(s_w)
    if trace <= 0 or lam[-1] <= PD_TOL * trace:
        raise NotPositiveDefiniteError(
            f"s_w is not positive definite (min eigenvalue {lam[-1]:.3e}, "
            f"trace {trace:.3e})")
    lam = np.maximum(lam, EIG_FLOOR * lam[0])
    whitener = within.vectors / np.sqrt(lam)
    between = sym_eig(whitener.T @ s_b @ whitener)
    return EigenResult(between.values, whitener @ between.vectors)


def two_step_generalized_eig(s_b, s_w, v):
    """Leading ``v`` columns of the two-step generalized eigensolution.

    The result ``W`` (``d x v``) satisfies ``W^T S_w W = I`` and
    ``W^T S_b W`` diagonal with non-increasing diagonal.
    """
    d = np.shape(s_w)[0]
    if not 1 <= v <= d:
        raise ValueError(f"v must be in [1, {d}], got {v}")
    return whitened_eig(s_b, s_w).vectors[:, :v]


def solve_with_ridge(fn, s, rho=DEFAULT_RHO):
    """Call ``fn(s)``; on failure retry with ``regularize(s, rho)`` then ``rho*100``.

    Returns ``(result, ridge)`` where ``ridge`` is the rho actually applied
    (0.0 when the unregularized call succeeded).
    """
    try:
        return fn(s), 0.0
    except NotPositiveDefiniteError:
        pass
    for r in (rho, rho * RIDGE_RETRY_FACTOR):
        if r <= 0:
            continue
        try:
            return fn(regularize(s, r)), r
        except NotPositiveDefiniteError:
            continue
    raise NotPositiveDefiniteError(
        f"matrix is not positive definite even with ridge {rho * RIDGE_RETRY_FACTOR:g}")


def count_significant(values, rel=1e-10):
    """Number of leading eigenvalues exceeding ``rel`` times the largest (>= 1)."""
    values = np.asarray(values)
    top = values[0]
    if top <= 0:
        return 1
    return max(1, int(np.sum(values > rel * top)))
