"""Cosine scoring for raw (SSC) and projected samples."""

from dataclasses import dataclass

import numpy as np

from .tensor import vectorize

ZERO_NORM = 1e-300


@dataclass(frozen=True)
class ScoredPair:
    pair_id: int
    score: float
    label: int
    fold: int


def cosine(u, v):
    """Cosine similarity; 0 when either vector has (near) zero norm."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.size} vs {v.size}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < ZERO_NORM or nv < ZERO_NORM:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def row_cosines(a, b):
    """Cosine between matching rows of two matrices."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    dot = np.einsum("ij,ij->i", a, b)
    ok = (na >= ZERO_NORM) & (nb >= ZERO_NORM)
    out = np.zeros(len(a))
    out[ok] = dot[ok] / (na[ok] * nb[ok])
    return np.clip(out, -1.0, 1.0)


def ssc_score(left_views, right_views):
    """Cosine of the concatenated views of two samples."""
    if len(left_views) != len(right_views):
        raise ValueError("samples have different view counts")
    for a, b in zip(left_views, right_views):
        if np.shape(a) != np.shape(b):
            raise ValueError("view dimensions differ between samples")
    return cosine(np.concatenate([np.ravel(a) for a in left_views]),
                  np.concatenate([np.ravel(b) for b in right_views]))


def model_score(model, left, right):
    """Cosine of the projected, vectorized pair."""
    return cosine(vectorize(model.project(left)), vectorize(model.project(right)))


def score_pairs(model, ds, pairs):
    """Score every pair of a :class:`~kinverify.pairs.PairSet`."""
    if len(pairs) == 0:
        return []
    # project each referenced sample once
    used = np.unique(pairs.index)
    feats = model.transform(ds.samples[used])
    pos = np.searchsorted(used, pairs.index)
    scores = row_cosines(feats[pos[:, 0]], feats[pos[:, 1]])
    return [ScoredPair(int(i), float(s), int(l), int(f))
            for i, s, l, f in zip(pairs.ids, scores, pairs.labels, pairs.folds)]
