"""Dense tensor algebra: mode-n unfolding, folding, mode products.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 and order >= 1.
Modes are 0-based.

Layout convention
-----------------
``unfold(t, k)`` places the mode-``k`` fibers in columns. Columns are ordered
lexicographically over the remaining mode indices with the *lowest* remaining
mode varying fastest (Fortran order). ``vectorize`` uses the same rule over all
modes, so for a ``d x V`` view-stacked sample it returns the views concatenated
in view order.
"""

import numpy as np

__all__ = ["as_tensor", "unfold", "fold", "mode_product", "multi_mode_product",
           "vectorize"]


def as_tensor(t):
    """Return ``t`` as a float64 array, validating order and shape."""
    arr = np.asarray(t, dtype=np.float64)
    if arr.ndim < 1:
        raise ValueError("tensor order must be >= 1")
    if any(s < 1 for s in arr.shape):
        raise ValueError(f"tensor shape entries must be >= 1, got {arr.shape}")
    return arr


def _check_mode(mode, order):
    if not 0 <= mode < order:
        raise ValueError(f"mode {mode} out of range for order-{order} tensor")


def unfold(t, mode):
    """Mode-``mode`` unfolding, shape ``(I_k, prod_{o != k} I_o)``."""
    t = as_tensor(t)
    _check_mode(mode, t.ndim)
    return np.reshape(np.moveaxis(t, mode, 0), (t.shape[mode], -1), order="F")


def fold(m, mode, shape):
    """Inverse of :func:`unfold`."""
    shape = tuple(int(s) for s in shape)
    _check_mode(mode, len(shape))
    m = np.asarray(m, dtype=np.float64)
    rest = tuple(s for i, s in enumerate(shape) if i != mode)
    expected = (shape[mode], int(np.prod(rest, dtype=np.int64)))
    if m.shape != expected:
        raise ValueError(f"matrix shape {m.shape} does not match {expected} "
                         f"for mode {mode} of shape {shape}")
    full = np.reshape(m, (shape[mode],) + rest, order="F")
    return np.moveaxis(full, 0, mode)


def mode_product(t, w, mode):
    """Mode-``mode`` product ``t x_k w``.

    ``w`` has shape ``(J, I_k)``; the result has mode-``k`` dimension ``J`` and
    satisfies ``unfold(result, k) == w @ unfold(t, k)``.
    """
    t = as_tensor(t)
    _check_mode(mode, t.ndim)
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] != t.shape[mode]:
        raise ValueError(f"matrix shape {w.shape} incompatible with mode {mode} "
                         f"of dimension {t.shape[mode]}")
    return np.moveaxis(np.tensordot(w, t, axes=(1, mode)), 0, mode)


def multi_mode_product(t, matrices, skip=None):
    """Apply ``matrices[k]`` on every mode ``k`` except ``skip``.

    ``None`` entries are treated as identity.
    """
    for k, w in enumerate(matrices):
        if k == skip or w is None:
            continue
        t = mode_product(t, w, k)
    return t


def vectorize(t):
    """Flatten with mode 0 varying fastest."""
    return np.ravel(as_tensor(t), order="F")
