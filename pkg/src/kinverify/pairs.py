"""Pair-based dataset model."""

from dataclasses import dataclass, field

import numpy as np

from .tensor import unfold


@dataclass(frozen=True)
class Dataset:
    """A pool of equally shaped sample tensors.

    ``samples`` has shape ``(n, I_1, ..., I_N)``. Pairs reference samples by
    row index; in the kinship setting the left member of a pair is the parent
    and the right member the child.
    """

    samples: np.ndarray
    ids: tuple = ()
    views: tuple = ()

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim < 2:
            raise ValueError("samples must have shape (n, I_1, ..., I_N)")
        object.__setattr__(self, "samples", samples)
        ids = tuple(self.ids) if self.ids else tuple(str(i) for i in range(len(samples)))
        if len(ids) != len(samples):
            raise ValueError(f"{len(ids)} ids for {len(samples)} samples")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate sample ids")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "views", tuple(self.views))

    @property
    def shape(self):
        return self.samples.shape[1:]

    def __len__(self):
        return len(self.samples)

    def index_of(self, sample_id):
        return self.ids.index(sample_id)


@dataclass(frozen=True)
class PairSet:
    """Labelled sample pairs with fold assignments.

    ``index`` is ``(n, 2)`` (left, right), ``labels`` is 1 for positive
    (same class) and 0 for negative pairs, ``folds`` holds fold ids ``1..K``.
    ``ids`` default to the row positions and survive :meth:`subset`.
    """

    index: np.ndarray
    labels: np.ndarray
    folds: np.ndarray = field(default=None)
    ids: np.ndarray = field(default=None)

    def __post_init__(self):
        index = np.asarray(self.index, dtype=np.int64).reshape(-1, 2)
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if len(labels) != len(index):
            raise ValueError("labels and pair index differ in length")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        folds = self.folds
        folds = (np.ones(len(index), dtype=np.int64) if folds is None
                 else np.asarray(folds, dtype=np.int64).ravel())
        if len(folds) != len(index):
            raise ValueError("folds and pair index differ in length")
        ids = (np.arange(len(index), dtype=np.int64) if self.ids is None
               else np.asarray(self.ids, dtype=np.int64).ravel())
        if len(ids) != len(index):
            raise ValueError("ids and pair index differ in length")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "folds", folds)

    def __len__(self):
        return len(self.index)

    @property
    def positives(self):
        return self.index[self.labels == 1]

    @property
    def negatives(self):
        return self.index[self.labels == 0]

    @property
    def n_folds(self):
        return int(self.folds.max()) if len(self.folds) else 0

    def subset(self, mask):
        mask = np.asarray(mask)
        return PairSet(self.index[mask], self.labels[mask], self.folds[mask],
                       self.ids[mask])

    def validate(self, n_samples, n_folds=None):
        """Raise ``ValueError`` listing every invariant violation."""
        problems = []
        if len(self.index) and (self.index.min() < 0 or self.index.max() >= n_samples):
            problems.append(f"pair index out of range for {n_samples} samples")
        pos = {tuple(p) for p in self.positives}
        shared = pos & {tuple(p) for p in self.negatives}
        if shared:
            problems.append(f"{len(shared)} pairs are both positive and negative")
        k = n_folds or self.n_folds
        for f in range(1, k + 1):
            in_fold = self.folds == f
            n_pos = int(np.sum(in_fold & (self.labels == 1)))
            n_neg = int(np.sum(in_fold & (self.labels == 0)))
            if n_pos + n_neg == 0:
                problems.append(f"fold {f} is empty")
            elif n_pos != n_neg:
                problems.append(f"fold {f} has {n_pos} positives and {n_neg} negatives")
        if len(self.folds) and (self.folds.min() < 1 or self.folds.max() > k):
            problems.append(f"fold ids must lie in 1..{k}")
        if problems:
            raise ValueError("; ".join(problems))


def assign_folds(labels, k, seed=0):
    """Balanced fold ids for ``labels``.

    Positives and negatives are shuffled separately with ``seed`` and dealt
    round-robin into folds ``1..k``.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds = np.zeros(len(labels), dtype=np.int64)
    for label in (1, 0):
        idx = np.flatnonzero(labels == label)
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = np.arange(len(idx)) % k + 1
    return folds


def _project_batch(batch, projections, skip):
    # batch has a leading pair axis; mode k sits on axis k + 1
    for k, w in enumerate(projections):
        if k == skip or w is None:
            continue
        batch = np.moveaxis(np.tensordot(w, batch, axes=(1, k + 1)), 0, k + 1)
    return batch


def difference_tensors(ds, pairs, projections=None, skip=None):
    """Projected difference tensors ``left - right`` for each pair.

    ``projections[o]`` (application orientation, ``I'_o x I_o``) is applied
    on every mode ``o != skip``; ``None`` means identity.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    diff = ds.samples[pairs[:, 0]] - ds.samples[pairs[:, 1]]
    if projections is None:
        return diff
    if len(projections) != diff.ndim - 1:
        raise ValueError(f"{len(projections)} projections for order-{diff.ndim - 1} samples")
    return _project_batch(diff, projections, skip)


def difference_vectors(ds, pairs, mode, projections=None):
    """Mode-``mode`` difference columns for each pair.

    Returns an array of shape ``(n_pairs, I_k, P)``: slice ``i`` is the
    mode-``mode`` unfolding of pair ``i``'s difference tensor after all other
    modes are projected.
    """
    diff = difference_tensors(ds, pairs, projections, skip=mode)
    if diff.shape[0] == 0:
        return np.zeros((0, diff.shape[mode + 1], 0))
    return np.stack([unfold(d, mode) for d in diff])
