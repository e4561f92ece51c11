"""Multilinear side-information discriminant analysis.

One projection per tensor mode, learned by alternating per-mode generalized
eigenproblems. Projections are stored in application orientation: the mode-k
matrix has shape ``(I'_k, I_k)`` and is applied with
:func:`kinverify.tensor.mode_product`.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import DEFAULT_RHO, count_significant, solve_with_ridge, whitened_eig
from .pairs import _project_batch, difference_tensors
from .sild import scatter
from .tensor import as_tensor, multi_mode_product

DEFAULT_MAX_ITERATIONS = 10
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class MsidaModel:
    w_per_mode: list
    iterations_run: int = 0
    converged: bool = False
    change_norms: list = field(default_factory=list)
    ridges: list = field(default_factory=list)

    @property
    def input_shape(self):
        return tuple(w.shape[1] for w in self.w_per_mode)

    @property
    def output_dims(self):
        return tuple(w.shape[0] for w in self.w_per_mode)


def mode_columns(diff, mode):
    """Rows are the mode-``mode`` fibers of every tensor in the batch ``diff``."""
    return np.moveaxis(diff, mode + 1, -1).reshape(-1, diff.shape[mode + 1])


def mode_scatters(ds, positives, negatives, mode, projections=None):
    """Mode-``mode`` within (positive) and between (negative) scatters.

    Every mode other than ``mode`` is first projected with ``projections``;
    the scatter is the sum of outer products of all mode-``mode`` difference
    columns over all pairs.

    Returns
    -------
    (s_w, s_b) : tuple of ndarray
        Both ``I_k x I_k``.
    """
    s_w = scatter(mode_columns(difference_tensors(ds, positives, projections, mode), mode))
    s_b = scatter(mode_columns(difference_tensors(ds, negatives, projections, mode), mode))
    return s_w, s_b


def columns_per_pair(projections, mode):
    """Number of mode-``mode`` difference columns each pair contributes."""
    return int(np.prod([w.shape[0] for o, w in enumerate(projections) if o != mode],
                       dtype=np.int64))


def _identity_rows(v, d):
    return np.eye(d)[:v]


def fit_msida(ds, pairs, output_dims=None, max_iterations=DEFAULT_MAX_ITERATIONS,
              epsilon=DEFAULT_EPSILON, rho=DEFAULT_RHO):
    """Fit per-mode projections by alternating optimization.

    Projections start at identity. Each sweep visits modes in ascending order
    and re-solves mode k's generalized eigenproblem with the latest
    projections of all other modes. Iteration stops after ``max_iterations``
    sweeps, or as soon as every mode's Frobenius change in a sweep is below
    ``I_k * I'_k * epsilon``. The first sweep measures change against the
    leading rows of the identity.

    Each mode whitens its scatters divided by the number of columns per pair
    (the product of the other modes' current output dims), so that at a
    fixpoint ``W_k S_w^k W_k^T = P_k I`` holds for every mode at once. Plain
    per-mode whitening has no fixpoint when output dims differ between modes:
    the trace of the whitened scatter equals the same total projected energy
    for every mode, which would force all output dims to be equal.

    Parameters
    ----------
    ds : Dataset
    pairs : PairSet
        Positive pairs feed ``S_w``, negative pairs ``S_b``.
    output_dims : sequence of int or None, optional
        Retained dimension per mode. ``None`` (globally or per entry) keeps
        the directions whose generalized eigenvalue exceeds 1e-10 times the
        largest on the first sweep; the choice is then frozen.
    max_iterations : int
    epsilon : float
    rho : float
        Ridge applied to ``S_w`` only when it is not positive definite.
    """
    shape = ds.shape
    order = len(shape)
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    dims = [None] * order if output_dims is None else list(output_dims)
    if len(dims) != order:
        raise ValueError(f"{len(dims)} output dims for order-{order} samples")
    for k, v in enumerate(dims):
        if v is not None and not 1 <= v <= shape[k]:
            raise ValueError(f"output dim {v} for mode {k} must be in [1, {shape[k]}]")

    positives, negatives = pairs.positives, pairs.negatives
    if len(positives) == 0 or len(negatives) == 0:
        raise ValueError("need at least one positive and one negative pair")

    projections = [np.eye(i) for i in shape]
    history = []
    ridges = [0.0] * order
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        changes = []
        for k in range(order):
            s_w, s_b = mode_scatters(ds, positives, negatives, k, projections)
            cols = columns_per_pair(projections, k)
            s_w, s_b = s_w / cols, s_b / cols
            if not (np.all(np.isfinite(s_w)) and np.all(np.isfinite(s_b))):
                raise FloatingPointError(f"non-finite scatter entries in mode {k}")
            sol, ridges[k] = solve_with_ridge(lambda sw: whitened_eig(s_b, sw), s_w, rho)
            if dims[k] is None:
                dims[k] = count_significant(sol.values)
            new = sol.vectors[:, :dims[k]].T
            prev = projections[k] if it > 1 else _identity_rows(dims[k], shape[k])
            changes.append(float(np.linalg.norm(new - prev)))
            projections[k] = new
        history.append(changes)
        if all(c < shape[k] * dims[k] * epsilon for k, c in enumerate(changes)):
            converged = True
            break
    return MsidaModel(projections, it, converged, history, ridges)


def project_tensor(model, t):
    """Project one sample tensor through every mode."""
    t = as_tensor(t)
    if t.shape != model.input_shape:
        raise ValueError(f"expected shape {model.input_shape}, got {t.shape}")
    return multi_mode_product(t, model.w_per_mode)


def project_batch(projections, batch):
    """Project a stack of samples ``(n, I_1, ..., I_N)``."""
    return _project_batch(np.asarray(batch, dtype=np.float64), projections, None)
