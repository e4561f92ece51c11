import numpy as np
import pytest

from kinverify.msida import mode_scatters
from kinverify.pairs import Dataset, PairSet, assign_folds, difference_vectors


def test_identical_samples_give_zero_differences(rng):
    x = rng.standard_normal((3, 4, 2))
    ds = Dataset(np.concatenate([x, x]))
    cols = difference_vectors(ds, [(0, 3), (1, 4), (2, 5)], 0)
    assert cols.shape == (3, 4, 2) and not cols.any()


def test_vector_samples_degenerate_to_plain_differences(rng):
    ds = Dataset(rng.standard_normal((4, 5)))
    cols = difference_vectors(ds, [(0, 1), (2, 3)], 0)
    assert cols.shape == (2, 5, 1)
    np.testing.assert_array_equal(cols[1, :, 0], ds.samples[2] - ds.samples[3])


def test_mode_fibers_of_difference(rng):
    ds = Dataset(rng.standard_normal((2, 3, 2)))
    cols = difference_vectors(ds, [(0, 1)], 0, [np.eye(3), np.eye(2)])
    diff = ds.samples[0] - ds.samples[1]
    np.testing.assert_array_equal(cols[0][:, 0], diff[:, 0])
    np.testing.assert_array_equal(cols[0][:, 1], diff[:, 1])


def test_other_modes_are_projected(rng):
    ds = Dataset(rng.standard_normal((2, 3, 4)))
    w = rng.standard_normal((2, 4))
    cols = difference_vectors(ds, [(0, 1)], 0, [None, w])
    np.testing.assert_allclose(cols[0], (ds.samples[0] - ds.samples[1]) @ w.T, atol=1e-14)


def test_swapping_pair_order_leaves_scatters_unchanged(rng):
    ds = Dataset(rng.standard_normal((6, 3, 2)))
    a = np.array([(0, 1), (2, 3)])
    b = a[:, ::-1]
    for k in range(2):
        np.testing.assert_allclose(mode_scatters(ds, a, a, k)[0], mode_scatters(ds, b, b, k)[0])


def test_assign_folds_balanced_and_seeded():
    labels = np.array([1] * 10 + [0] * 10)
    folds = assign_folds(labels, 5, seed=3)
    for f in range(1, 6):
        assert np.sum((folds == f) & (labels == 1)) == 2
        assert np.sum((folds == f) & (labels == 0)) == 2
    assert np.array_equal(folds, assign_folds(labels, 5, seed=3))
    assert not np.array_equal(folds, assign_folds(labels, 5, seed=4))


def test_pairset_views_and_validation():
    ps = PairSet([(0, 1), (2, 3), (0, 3), (2, 1)], [1, 1, 0, 0], [1, 2, 1, 2])
    np.testing.assert_array_equal(ps.positives, [(0, 1), (2, 3)])
    np.testing.assert_array_equal(ps.negatives, [(0, 3), (2, 1)])
    ps.validate(4)
    sub = ps.subset(ps.folds == 2)
    np.testing.assert_array_equal(sub.ids, [1, 3])
    with pytest.raises(ValueError, match="out of range"):
        ps.validate(3)


def test_pairset_validation_lists_every_problem():
    ps = PairSet([(0, 1), (0, 1), (1, 2)], [1, 0, 1], [1, 1, 2])
    with pytest.raises(ValueError) as err:
        ps.validate(3)
    msg = str(err.value)
    assert "both positive and negative" in msg and "fold 2 has 1 positives and 0 negatives" in msg


def test_dataset_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        Dataset(np.zeros((2, 3)), ids=["a", "a"])
