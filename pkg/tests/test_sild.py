import numpy as np
import pytest

from kinverify.sild import fit_sild, pair_scatter, project, SildModel


def test_pair_scatter_small_cases():
    u = np.array([1.0, 2.0])
    np.testing.assert_array_equal(pair_scatter([(u, u)]), np.zeros((2, 2)))
    np.testing.assert_array_equal(pair_scatter([(np.array([1.0, 0.0]), np.zeros(2))]),
                                  [[1.0, 0.0], [0.0, 0.0]])


def test_pair_scatter_matches_loop(rng):
    pairs = [(rng.standard_normal(4), rng.standard_normal(4)) for _ in range(3)]
    expected = np.zeros((4, 4))
    for u, v in pairs:
        for a in range(4):
            for b in range(4):
                expected[a, b] += (u[a] - v[a]) * (u[b] - v[b])
    np.testing.assert_allclose(pair_scatter(pairs), expected, rtol=1e-14, atol=1e-15)
    s = pair_scatter(pairs)
    assert np.allclose(s, s.T) and np.linalg.eigvalsh(s).min() > -1e-12


def test_pair_scatter_errors():
    with pytest.raises(ValueError):
        pair_scatter([])
    with pytest.raises(ValueError):
        pair_scatter([(np.zeros(2), np.zeros(3))])


def test_axis_separable_case(rng):
    # positives vary along axis 0, negatives along axis 1
    pos = [(np.array([a, 0.0]), np.zeros(2)) for a in rng.standard_normal(5)]
    neg = [(np.array([0.0, b]), np.zeros(2)) for b in rng.standard_normal(5)]
    model = fit_sild(pos, neg, v=1)
    direction = model.w[:, 0] / np.linalg.norm(model.w[:, 0])
    assert abs(direction[1]) > 1 - 1e-9
    assert model.ridge > 0


def test_uninformative_pairs_give_unit_eigenvalues(rng):
    pairs = [(rng.standard_normal(4), rng.standard_normal(4)) for _ in range(12)]
    model = fit_sild(pairs, pairs, v=4)
    np.testing.assert_allclose(model.eigenvalues, 1.0, atol=1e-9)


def test_random_instance_against_eig_oracle(rng):
    pos = [(rng.standard_normal(6), rng.standard_normal(6)) for _ in range(20)]
    neg = [(rng.standard_normal(6) * [3, 1, 1, 2, 1, 1], rng.standard_normal(6)) for _ in range(20)]
    model = fit_sild(pos, neg, v=3)
    s_w, s_b = pair_scatter(pos), pair_scatter(neg)
    oracle = np.sort(np.linalg.eigvals(np.linalg.solve(s_w, s_b)).real)[::-1][:3]
    np.testing.assert_allclose(model.eigenvalues, oracle, rtol=1e-9)
    for j in range(3):
        w = model.w[:, j]
        r = s_b @ w - oracle[j] * s_w @ w
        assert np.linalg.norm(r) <= 1e-6 * np.linalg.norm(s_b)
    # whitening, diagonalization, ordering
    assert np.linalg.norm(model.w.T @ s_w @ model.w - np.eye(3)) <= 1e-8
    b = model.w.T @ s_b @ model.w
    assert np.max(np.abs(b - np.diag(np.diag(b)))) <= 1e-8
    assert np.all(np.diff(np.diag(b)) <= 0)


def test_default_dimension_keeps_significant_directions(rng):
    pos = [(rng.standard_normal(5), rng.standard_normal(5)) for _ in range(10)]
    # negatives differ only in a 2-d subspace: 3 generalized eigenvalues vanish
    neg = [(np.r_[rng.standard_normal(2), 0, 0, 0], np.zeros(5)) for _ in range(10)]
    assert fit_sild(pos, neg).dim == 2


def test_project(rng):
    x = rng.standard_normal(4)
    np.testing.assert_array_equal(project(SildModel(np.eye(4)), x), x)
    w = rng.standard_normal((4, 2))
    model = SildModel(w)
    assert not project(model, np.zeros(4)).any()
    np.testing.assert_allclose(project(model, x), [w[:, 0] @ x, w[:, 1] @ x])
    with pytest.raises(ValueError):
        project(model, np.zeros(3))
