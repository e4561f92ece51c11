"""Within-class covariance normalization and end-to-end verification models."""

from dataclasses import dataclass, field

import numpy as np

from .msida import (DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS, fit_msida,
                    mode_columns, mode_scatters, project_batch)
from .numerics import (DEFAULT_RHO, NotPositiveDefiniteError, cholesky_lower,
                       solve_with_ridge, symmetrize)
from .pairs import Dataset, difference_tensors
from .sild import fit_sild_scatters, scatter
from .tensor import as_tensor, vectorize

METHODS = ("ssc", "sild", "msida", "sild-wccn", "msida-wccn")


@dataclass(frozen=True)
class WccnStack:
    g_per_mode: list
    c_per_mode: list
    d_per_mode: list
    ridges: list = field(default_factory=list)


def within_covariance_projected(ds, positives, projections, mode):
    """Covariance of fully projected positive-pair difference columns in mode ``mode``.

    ``G = (1 / (C1 * P)) sum_i sum_p delta_ip delta_ip^T`` where ``delta_ip``
    runs over the mode-``mode`` fibers of each projected difference tensor.
    """
    positives = np.asarray(positives).reshape(-1, 2)
    if len(positives) == 0:
        raise ValueError("WCCN needs at least one positive pair")
    rows = mode_columns(difference_tensors(ds, positives, projections), mode)
    return scatter(rows) / rows.shape[0]


# Factors whose C^T G C misses the identity by more than this are rejected
# (ill-conditioned G), which sends wccn_factor to the ridge.
FACTOR_TOL = 1e-9


def _inverse_cholesky(g):
    lower = cholesky_lower(g)
    inv_lower = np.linalg.solve(lower, np.eye(len(g)))
    c = cholesky_lower(symmetrize(inv_lower.T @ inv_lower))
    if np.linalg.norm(c.T @ g @ c - np.eye(len(g))) > FACTOR_TOL:
        raise NotPositiveDefiniteError("within-class covariance is too ill-conditioned")
    return c


def wccn_factor(g, rho=DEFAULT_RHO):
    """Lower Cholesky factor ``C`` of ``G^{-1}``, i.e. ``G^{-1} = C C^T``.

    ``G`` is ridge-regularized only if it is not positive definite.

    Returns
    -------
    (C, ridge) : tuple
    """
    return solve_with_ridge(_inverse_cholesky, np.asarray(g, dtype=np.float64), rho)


def compose(c_per_mode, w_per_mode):
    """``D^k = (C^k)^T W^k`` per mode (application orientation)."""
    if len(c_per_mode) != len(w_per_mode):
        raise ValueError("need one WCCN factor per projection")
    out = []
    for c, w in zip(c_per_mode, w_per_mode):
        if c.shape[0] != w.shape[0]:
            raise ValueError(f"WCCN factor {c.shape} does not match projection {w.shape}")
        out.append(c.T @ w)
    return out


def fit_wccn(ds, positives, projections, rho=DEFAULT_RHO):
    """Fit WCCN on top of fixed base projections, one factor per mode."""
    gs, cs, ridges = [], [], []
    for k in range(len(projections)):
        g = within_covariance_projected(ds, positives, projections, k)
        c, ridge = wccn_factor(g, rho)
        gs.append(g)
        cs.append(c)
        ridges.append(ridge)
    return WccnStack(gs, cs, compose(cs, projections), ridges)


@dataclass(frozen=True)
class PipelineConfig:
    """Fitting options shared by every method.

    ``dims`` is either one entry per tensor mode (MSIDA) or a single entry
    (SILD); each method ignores the other form, so one config can drive a
    comparison of all methods.
    """

    dims: tuple = None
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    epsilon: float = DEFAULT_EPSILON
    rho: float = DEFAULT_RHO


@dataclass(frozen=True)
class VerificationModel:
    """Projections plus optional WCCN, scored by cosine similarity.

    ``flatten`` marks vector methods (SILD), which see each sample as its
    vectorization. ``projections`` is ``None`` for the SSC baseline.
    """

    method: str
    input_shape: tuple
    projections: list = None
    flatten: bool = False
    wccn: WccnStack = None
    info: dict = field(default_factory=dict)

    @property
    def effective(self):
        if self.projections is None:
            return None
        return self.wccn.d_per_mode if self.wccn is not None else self.projections

    def transform(self, samples):
        """Projected, vectorized rows for a stack of samples ``(n, *input_shape)``."""
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape[1:] != tuple(self.input_shape):
            raise ValueError(f"expected sample shape {tuple(self.input_shape)}, "
                             f"got {samples.shape[1:]}")
        n = samples.shape[0]
        if self.flatten:
            samples = samples.reshape(n, -1, order="F")
        if self.projections is not None:
            samples = project_batch(self.effective, samples)
        return samples.reshape(n, -1, order="F")

    def project(self, t):
        t = as_tensor(t)
        return self.transform(t[None])[0]


def _flatten(ds):
    n = len(ds)
    return Dataset(ds.samples.reshape(n, -1, order="F"), ds.ids, ds.views)


def parse_method(method):
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    base, _, suffix = method.partition("-")
    return base, suffix == "wccn"


def fit_pipeline(method, with_wccn, ds, pairs, config=None):
    """Fit a verification model.

    Parameters
    ----------
    method : {"ssc", "sild", "msida"}
    with_wccn : bool
        Apply WCCN after the base projection (ignored for ``"ssc"``).
    ds : Dataset
    pairs : PairSet
        Training pairs only.
    config : PipelineConfig, optional
    """
    config = config or PipelineConfig()
    shape = tuple(ds.shape)
    if method == "ssc":
        return VerificationModel("ssc", shape)
    if method == "sild":
        work = _flatten(ds)
        dims = config.dims
        if isinstance(dims, int):
            pass
        elif dims is not None and len(dims) == 1:
            dims = dims[0]
        elif dims is not None and len(dims) == len(shape):
            dims = None  # per-mode dims configure MSIDA only
        elif dims is not None:
            raise ValueError(f"SILD takes one output dimension, got {list(dims)}")
        s_w, s_b = mode_scatters(work, pairs.positives, pairs.negatives, 0)
        sild = fit_sild_scatters(s_b, s_w, dims, config.rho)
        projections = [sild.w.T]
        info = {"ridges": [sild.ridge]}
    elif method == "msida":
        work = ds
        dims = config.dims
        if isinstance(dims, int):
            dims = [dims]
        if dims is not None and len(dims) != len(shape):
            if len(dims) != 1:
                raise ValueError(f"{len(dims)} output dims for order-{len(shape)} samples")
            dims = None  # a single dim configures SILD only
        model = fit_msida(ds, pairs, dims, config.max_iterations,
                          config.epsilon, config.rho)
        projections = model.w_per_mode
        info = {"iterations_run": model.iterations_run, "converged": model.converged,
                "change_norms": model.change_norms, "ridges": model.ridges}
    else:
        raise ValueError(f"unknown method {method!r}")
    stack = fit_wccn(work, pairs.positives, projections, config.rho) if with_wccn else None
    name = method + ("-wccn" if with_wccn else "")
    return VerificationModel(name, shape, projections, method == "sild", stack, info)


def fit_method(name, ds, pairs, config=None):
    """Fit one of :data:`METHODS` by name."""
    base, with_wccn = parse_method(name)
    return fit_pipeline(base, with_wccn, ds, pairs, config)
