import hashlib
import json

import numpy as np
import pytest

from kinverify.dataset_io import (BundleError, DatasetFormatError, dataset_digest, load_dataset,
                                  load_model, save_model, write_dataset)
from kinverify.evaluation import kfold_evaluate
from kinverify.reference import REFERENCE_SYNTH
from kinverify.scoring import score_pairs
from kinverify.synth import SynthConfig, generate_synthetic
from kinverify.wccn import fit_method

REFERENCE_DIGEST = "69e900fc22fec9d5f9864d563baf3741543ee12665c7c323b87c5892c416fe17"


def _write(path, text):
    path.write_text(text)
    return path


def _manifest(tmp_path, views, pairs="pairs.csv", **extra):
    m = {"views": [{"name": n, "path": p} for n, p in views], "pairs": pairs, **extra}
    return _write(tmp_path / "manifest.json", json.dumps(m))


@pytest.fixture
def fixture_dir(tmp_path):
    _write(tmp_path / "a.csv", "id,f1,f2\nimg1,1.0,2.0\nimg2,3.5,-1\nimg3,0,0.25\n")
    _write(tmp_path / "b.csv", "id,f1,f2\nimg1,10,20\nimg2,30,40\nimg3,50,60\n")
    _write(tmp_path / "pairs.csv", "left_id,right_id,label,fold\n"
           "img1,img2,1,1\nimg1,img3,0,1\nimg2,img3,1,2\nimg3,img2,0,2\n")
    return tmp_path


def test_hand_fixture_field_by_field(fixture_dir):
    ds, ps = load_dataset(_manifest(fixture_dir, [("va", "a.csv"), ("vb", "b.csv")]))
    assert ds.ids == ("img1", "img2", "img3") and ds.views == ("va", "vb")
    assert ds.samples.shape == (3, 2, 2)
    np.testing.assert_array_equal(ds.samples[0], [[1.0, 10.0], [2.0, 20.0]])
    np.testing.assert_array_equal(ds.samples[1], [[3.5, 30.0], [-1.0, 40.0]])
    np.testing.assert_array_equal(ds.samples[2], [[0.0, 50.0], [0.25, 60.0]])
    np.testing.assert_array_equal(ps.index, [[0, 1], [0, 2], [1, 2], [2, 1]])
    np.testing.assert_array_equal(ps.labels, [1, 0, 1, 0])
    np.testing.assert_array_equal(ps.folds, [1, 1, 2, 2])


def test_single_view_gives_vectors(fixture_dir):
    ds, _ = load_dataset(_manifest(fixture_dir, [("va", "a.csv")]))
    assert ds.samples.shape == (3, 2, 1)
    np.testing.assert_array_equal(ds.samples[:, :, 0], [[1, 2], [3.5, -1], [0, 0.25]])


def test_dimension_mismatch_names_both_views(fixture_dir):
    _write(fixture_dir / "c.csv", "id,f1,f2,f3\nimg1,1,2,3\nimg2,1,2,3\nimg3,1,2,3\n")
    with pytest.raises(DatasetFormatError, match="dimension mismatch") as err:
        load_dataset(_manifest(fixture_dir, [("va", "a.csv"), ("vc", "c.csv")]))
    assert "'va'" in str(err.value) and "'vc'" in str(err.value)


@pytest.mark.parametrize("body, where, what", [
    ("id,f1,f2\nimg1,1,2\nimg2,x,2\nimg3,1,1\n", ":3:", "malformed"),
    ("id,f1,f2\nimg1,1,2\nimg2,1\nimg3,1,1\n", ":3:", "fields"),
    ("id,f1,f2\nimg1,1,2\nimg2,1,2\nimg1,1,1\n", ":4:", "duplicate"),
    ("x,f1,f2\nimg1,1,2\n", ":1:", "header"),
])
def test_feature_errors_carry_file_and_line(fixture_dir, body, where, what):
    _write(fixture_dir / "a.csv", body)
    with pytest.raises(DatasetFormatError, match=what) as err:
        load_dataset(_manifest(fixture_dir, [("va", "a.csv")]))
    assert f"a.csv{where}" in str(err.value)


def test_pair_errors(fixture_dir):
    m = _manifest(fixture_dir, [("va", "a.csv")])
    _write(fixture_dir / "pairs.csv", "left_id,right_id,label,fold\nimg1,img9,1,1\n")
    with pytest.raises(DatasetFormatError, match=r"pairs.csv:2: unknown sample id"):
        load_dataset(m)
    _write(fixture_dir / "pairs.csv", "left_id,right_id,label,fold\nimg1,img2,2,1\n")
    with pytest.raises(DatasetFormatError, match=r"pairs.csv:2: label"):
        load_dataset(m)


def test_missing_file(fixture_dir):
    with pytest.raises(DatasetFormatError, match="missing.csv: file not found"):
        load_dataset(_manifest(fixture_dir, [("va", "missing.csv")]))


def test_empty_folds_are_assigned(fixture_dir):
    _write(fixture_dir / "pairs.csv", "left_id,right_id,label,fold\n"
           "img1,img2,1,\nimg1,img3,0,\nimg2,img3,1,\nimg3,img2,0,\n")
    _, ps = load_dataset(_manifest(fixture_dir, [("va", "a.csv")], n_folds=2, seed=3))
    assert sorted(ps.folds.tolist()) == [1, 1, 2, 2]
    for f in (1, 2):
        assert sorted(ps.labels[ps.folds == f].tolist()) == [0, 1]


def test_write_reload_roundtrip(tmp_path, small_synth):
    ds, ps = small_synth
    ds2, ps2 = load_dataset(write_dataset(ds, ps, tmp_path))
    assert np.array_equal(ds.samples, ds2.samples)
    assert ds.ids == ds2.ids and ds.views == ds2.views
    for a, b in ((ps.index, ps2.index), (ps.labels, ps2.labels), (ps.folds, ps2.folds)):
        assert np.array_equal(a, b)
    assert dataset_digest(ds, ps) == dataset_digest(ds2, ps2)


def test_reference_digest_is_frozen():
    assert dataset_digest(*generate_synthetic(REFERENCE_SYNTH)) == REFERENCE_DIGEST


def test_generation_is_deterministic(tmp_path):
    cfg = SynthConfig(seed=11, families=20, views=2, dim=5, latent=2, folds=2)
    write_dataset(*generate_synthetic(cfg), tmp_path / "a")
    write_dataset(*generate_synthetic(cfg), tmp_path / "b")
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    other = generate_synthetic(SynthConfig(seed=12, families=20, views=2, dim=5, latent=2, folds=2))
    assert dataset_digest(*other) != dataset_digest(*generate_synthetic(cfg))


def test_noiseless_positives_identical():
    cfg = SynthConfig(seed=5, families=30, views=3, dim=6, latent=4, within_noise=0,
                      nuisance_noise=0, folds=3)
    ds, ps = generate_synthetic(cfg)
    for a, b in ps.positives:
        assert np.allclose(ds.samples[a], ds.samples[b])
    assert kfold_evaluate(ds, ps, "ssc").means["ssc"] == 100.0


@pytest.fixture(scope="module")
def models():
    ds, ps = generate_synthetic(SynthConfig(seed=3, families=40, views=3, dim=6, latent=3,
                                            isotropic_noise=0.2, folds=2))
    return ds, ps, {m: fit_method(m, ds, ps) for m in ("ssc", "sild", "msida-wccn")}


@pytest.mark.parametrize("method", ["ssc", "sild", "msida-wccn"])
def test_bundle_roundtrip_rescore_exact(tmp_path, models, method):
    ds, ps, fitted = models
    model = fitted[method]
    loaded = load_model(save_model(model, tmp_path / "bundle"))
    assert loaded.method == method and loaded.input_shape == model.input_shape
    sub = ps.subset(np.arange(len(ps)) < 20)
    a = [p.score for p in score_pairs(model, ds, sub)]
    b = [p.score for p in score_pairs(loaded, ds, sub)]
    assert a == b


def test_bundle_layout(tmp_path, models):
    path = save_model(models[2]["msida-wccn"], tmp_path / "m")
    names = sorted(p.name for p in path.iterdir())
    assert names == ["C_1.csv", "C_2.csv", "D_1.csv", "D_2.csv", "G_1.csv", "G_2.csv",
                     "W_1.csv", "W_2.csv", "checksums.txt", "header.json"]
    w1 = models[2]["msida-wccn"].projections[0]
    assert (path / "W_1.csv").read_text().splitlines()[0] == f"{w1.shape[0]},{w1.shape[1]}"


def test_truncated_bundle_is_corrupt(tmp_path, models):
    path = save_model(models[2]["msida-wccn"], tmp_path / "m")
    text = (path / "D_1.csv").read_text()
    (path / "D_1.csv").write_text(text[: len(text) // 2])
    with pytest.raises(BundleError, match="checksum"):
        load_model(path)


def test_bundle_version_mismatch(tmp_path, models):
    path = save_model(models[2]["sild"], tmp_path / "m")
    header = json.loads((path / "header.json").read_text())
    header["version"] = 99
    text = json.dumps(header)
    (path / "header.json").write_text(text)
    sums = (path / "checksums.txt").read_text().splitlines()
    digest = hashlib.sha256(text.encode()).hexdigest()
    sums = [f"{digest}  header.json" if s.endswith("header.json") else s for s in sums]
    (path / "checksums.txt").write_text("\n".join(sums) + "\n")
    with pytest.raises(BundleError, match="version"):
        load_model(path)
