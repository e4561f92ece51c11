"""Side-information linear discriminant analysis on vectors."""

from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULT_RHO, count_significant, solve_with_ridge, whitened_eig


@dataclass(frozen=True)
class SildModel:
    """Fitted SILD projection.

    ``w`` is ``d x v``; samples are projected as ``w.T @ x``.
    """

    w: np.ndarray
    ridge: float = 0.0
    eigenvalues: np.ndarray = None

    @property
    def dim(self):
        return self.w.shape[1]


def _as_pair_array(pairs):
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[1] != 2:
        raise ValueError("expected a list of (u, v) vector pairs of equal dimension")
    if arr.shape[0] == 0:
        raise ValueError("pair list is empty")
    return arr


def scatter(diffs):
    """Sum of outer products of the rows of ``diffs``."""
    diffs = np.asarray(diffs, dtype=np.float64)
    return diffs.T @ diffs


def pair_scatter(pairs):
    """``sum_i (u_i - v_i)(u_i - v_i)^T`` over a list of ``(u, v)`` pairs."""
    arr = _as_pair_array(pairs)
    return scatter(arr[:, 0] - arr[:, 1])


def fit_sild_scatters(s_b, s_w, v=None, rho=DEFAULT_RHO):
    """SILD from precomputed between (negative) and within (positive) scatters."""
    sol, ridge = solve_with_ridge(lambda sw: whitened_eig(s_b, sw), s_w, rho)
    if v is None:
        v = count_significant(sol.values)
    d = s_w.shape[0]
    if not 1 <= v <= d:
        raise ValueError(f"v must be in [1, {d}], got {v}")
    return SildModel(sol.vectors[:, :v], ridge, sol.values[:v])


def fit_sild(positives, negatives, v=None, rho=DEFAULT_RHO):
    """Fit SILD from positive and negative ``(u, v)`` vector pairs.

    ``S_w`` is built from positive differences and ``S_b`` from negative ones.
    When ``S_w`` is singular it is ridge-regularized (``rho``, then
    ``100 * rho``). ``v`` defaults to the number of generalized eigenvalues
    above ``1e-10`` times the largest.
    """
    s_w = pair_scatter(positives)
    s_b = pair_scatter(negatives)
    if s_w.shape != s_b.shape:
        raise ValueError("positive and negative pairs differ in dimension")
    return fit_sild_scatters(s_b, s_w, v, rho)


def project(model, x):
    """Project a vector (or rows of a matrix) with ``model.w.T``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.w.shape[0]:
        raise ValueError(f"expected dimension {model.w.shape[0]}, got {x.shape[-1]}")
    return x @ model.w
