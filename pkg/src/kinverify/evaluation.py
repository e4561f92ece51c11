"""ROC analysis, threshold selection and k-fold cross-validation."""

from dataclasses import dataclass, field

import numpy as np

from .scoring import score_pairs
from .wccn import fit_method

DEFAULT_FOLDS = 5


@dataclass(frozen=True)
class RocCurve:
    """ROC points ``(threshold, fpr, tpr)`` by descending threshold.

    A pair is called positive when its score is ``>= threshold``; the first
    point is the ``+inf`` sentinel at ``(0, 0)``.
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float
    best_threshold: float
    best_accuracy: float

    @property
    def points(self):
        return list(zip(self.thresholds.tolist(), self.fpr.tolist(), self.tpr.tolist()))


def _unpack(scored, labels=None):
    if labels is None:
        scores = np.array([p.score for p in scored], dtype=np.float64)
        labels = np.array([p.label for p in scored], dtype=np.int64)
    else:
        scores = np.asarray(scored, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(np.sum(labels == 1))
    if n_pos == 0 or n_pos == len(labels):
        raise ValueError("ROC analysis needs both positive and negative pairs")
    return scores, labels


def _counts_by_distinct(scores, labels):
    # distinct scores ascending with positive / negative counts per value
    values, inverse = np.unique(scores, return_inverse=True)
    pos = np.bincount(inverse, weights=(labels == 1), minlength=len(values))
    neg = np.bincount(inverse, weights=(labels == 0), minlength=len(values))
    return values, pos, neg


def best_threshold_accuracy(scored, labels=None):
    """Threshold maximizing ``(TP + TN) / n`` with positives ``score > threshold``.

    Candidates are ``-inf``, midpoints of adjacent distinct scores and
    ``+inf``; ties go to the smallest threshold. Accuracy is a fraction.
    """
    scores, labels = _unpack(scored, labels)
    values, pos, neg = _counts_by_distinct(scores, labels)
    # candidate j calls values[j:] positive, j = 0..m
    pos_at_or_above = np.concatenate([np.cumsum(pos[::-1])[::-1], [0.0]])
    neg_below = np.concatenate([[0.0], np.cumsum(neg)])
    correct = pos_at_or_above + neg_below
    j = int(np.argmax(correct))
    if j == 0:
        threshold = -np.inf
    elif j == len(values):
        threshold = np.inf
    else:
        threshold = float(values[j - 1] + (values[j] - values[j - 1]) / 2)
    return threshold, float(correct[j] / len(scores))


def accuracy_at(scores, labels, threshold):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    return float(np.mean((scores > threshold) == (labels == 1)))


def roc_curve(scored, labels=None):
    """ROC curve with trapezoidal AUC; tied scores form a single step."""
    scores, labels = _unpack(scored, labels)
    values, pos, neg = _counts_by_distinct(scores, labels)
    tp = np.concatenate([[0.0], np.cumsum(pos[::-1])])
    fp = np.concatenate([[0.0], np.cumsum(neg[::-1])])
    tpr = tp / tp[-1]
    fpr = fp / fp[-1]
    thresholds = np.concatenate([[np.inf], values[::-1]])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    threshold, acc = best_threshold_accuracy(scores, labels)
    return RocCurve(thresholds, fpr, tpr, auc, threshold, acc)


def mann_whitney_auc(scores, labels):
    """Fraction of (positive, negative) pairs ranked correctly, ties counting 1/2."""
    scores, labels = _unpack(scores, labels)
    values, pos, neg = _counts_by_distinct(scores, labels)
    neg_below = np.concatenate([[0.0], np.cumsum(neg)[:-1]])
    wins = np.sum(pos * neg_below) + 0.5 * np.sum(pos * neg)
    return float(wins / (pos.sum() * neg.sum()))


@dataclass
class FoldResult:
    fold: int
    accuracy: float  # percent
    threshold: float
    roc: RocCurve
    scores: list = field(default_factory=list)


@dataclass
class MethodReport:
    method: str
    folds: list = field(default_factory=list)

    @property
    def accuracies(self):
        return [f.accuracy for f in self.folds]

    @property
    def mean(self):
        return float(np.mean(self.accuracies))


@dataclass
class CvReport:
    rows: list = field(default_factory=list)

    def __getitem__(self, method):
        for row in self.rows:
            if row.method == method:
                return row
        raise KeyError(method)

    @property
    def means(self):
        return {row.method: row.mean for row in self.rows}


def evaluate_fold(ds, pairs, method, fold, config=None):
    """Train on every pair outside ``fold`` and test on ``fold``.

    The decision threshold is chosen on the training scores.
    """
    train = pairs.subset(pairs.folds != fold)
    test = pairs.subset(pairs.folds == fold)
    model = fit_method(method, ds, train, config)
    train_scored = score_pairs(model, ds, train)
    threshold, _ = best_threshold_accuracy(train_scored)
    test_scored = score_pairs(model, ds, test)
    scores = np.array([p.score for p in test_scored])
    correct = int(np.sum((scores > threshold) == (test.labels == 1)))
    # 100 * correct / n rather than 100 * fraction keeps round percentages exact
    return FoldResult(fold, 100.0 * correct / len(test), threshold, roc_curve(test_scored),
                      test_scored)


def kfold_evaluate(ds, pairs, methods, config=None, k=None):
    """Cross-validate one method name or a list of them over ``k`` folds."""
    if isinstance(methods, str):
        methods = [methods]
    k = k or pairs.n_folds
    pairs.validate(len(ds), k)
    report = CvReport()
    for method in methods:
        row = MethodReport(method)
        for fold in range(1, k + 1):
            row.folds.append(evaluate_fold(ds, pairs, method, fold, config))
        report.rows.append(row)
    return report
