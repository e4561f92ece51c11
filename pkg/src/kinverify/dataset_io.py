"""Feature/pair CSV files, dataset manifests and model bundles.

Formats
-------
Feature file (one per view)
    header ``id,f1,...,fd``; each row a sample id followed by ``d`` floats.
Pair file
    header ``left_id,right_id,label,fold``; label is 1 (positive) or 0
    (negative). ``fold`` may be left empty, in which case folds come from the
    manifest's fold file or are assigned with a balanced seeded shuffle.
Fold file (optional)
    header ``pair_index,fold``; overrides the pair file's fold column.
Manifest (JSON)
    ``{"views": [{"name": ..., "path": ...}, ...], "pairs": path,
    "folds": path or null, "dim": d, "seed": int}``. Relative paths resolve
    against the manifest's directory.
Score file
    header ``pair_id,score,label,fold``.
Model bundle (directory)
    ``header.json`` (format version, method, shapes, fit diagnostics), one
    matrix file per mode per factor (``W_k.csv``, ``G_k.csv``, ``C_k.csv``,
    ``D_k.csv`` with 1-based ``k``), and ``checksums.txt`` holding the SHA-256
    of every other file. Matrix files start with a ``rows,cols`` line.

Floats are written with ``repr`` so that reading them back is exact.
"""

import csv
import hashlib
import io
import json
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

from .pairs import Dataset, PairSet, assign_folds
from .wccn import VerificationModel, WccnStack

BUNDLE_VERSION = 1
CHECKSUM_FILE = "checksums.txt"


class DatasetFormatError(ValueError):
    """A dataset file is missing, malformed or inconsistent."""


class BundleError(ValueError):
    """A model bundle cannot be loaded."""


# ---------------------------------------------------------------- atomic IO

def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x):
    return repr(float(x))


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------------ readers

def _read_rows(path):
    path = Path(path)
    if not path.is_file():
        raise DatasetFormatError(f"{path}: file not found")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DatasetFormatError(f"{path}:1: empty file")
    return rows


def read_features(path, dim=None):
    """Read one view's feature file; returns ``(ids, matrix)``."""
    rows = _read_rows(path)
    header = rows[0]
    if not header or header[0] != "id":
        raise DatasetFormatError(f"{path}:1: header must start with 'id'")
    d = len(header) - 1
    if dim is not None and d != dim:
        raise DatasetFormatError(f"{path}:1: expected {dim} feature columns, found {d}")
    ids, data, seen = [], [], set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != d + 1:
            raise DatasetFormatError(f"{path}:{lineno}: expected {d + 1} fields, got {len(row)}")
        sid = row[0]
        if sid in seen:
            raise DatasetFormatError(f"{path}:{lineno}: duplicate sample id {sid!r}")
        seen.add(sid)
        try:
            values = [float(x) for x in row[1:]]
        except ValueError:
            raise DatasetFormatError(f"{path}:{lineno}: malformed number") from None
        if not all(np.isfinite(values)):
            raise DatasetFormatError(f"{path}:{lineno}: non-finite value")
        ids.append(sid)
        data.append(values)
    return ids, np.array(data, dtype=np.float64).reshape(len(ids), d)


def read_pairs(path, id_index):
    """Read a pair file; returns ``(index, labels, folds)`` with ``folds`` 0 where empty."""
    rows = _read_rows(path)
    if rows[0] != ["left_id", "right_id", "label", "fold"]:
        raise DatasetFormatError(f"{path}:1: header must be left_id,right_id,label,fold")
    index, labels, folds = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 4:
            raise DatasetFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
        left, right, label, fold = row
        for sid in (left, right):
            if sid not in id_index:
                raise DatasetFormatError(f"{path}:{lineno}: unknown sample id {sid!r}")
        if label not in ("0", "1"):
            raise DatasetFormatError(f"{path}:{lineno}: label must be 0 or 1")
        try:
            fold_id = int(fold) if fold.strip() else 0
        except ValueError:
            raise DatasetFormatError(f"{path}:{lineno}: malformed fold {fold!r}") from None
        if fold.strip() and fold_id < 1:
            raise DatasetFormatError(f"{path}:{lineno}: fold ids start at 1")
        index.append((id_index[left], id_index[right]))
        labels.append(int(label))
        folds.append(fold_id)
    seen = {}
    for lineno, pair in enumerate(index, start=2):
        if pair in seen:
            raise DatasetFormatError(f"{path}:{lineno}: duplicate pair (first on line {seen[pair]})")
        seen[pair] = lineno
    return (np.array(index, dtype=np.int64).reshape(-1, 2), np.array(labels, dtype=np.int64),
            np.array(folds, dtype=np.int64))


def read_folds(path, n_pairs):
    rows = _read_rows(path)
    if rows[0] != ["pair_index", "fold"]:
        raise DatasetFormatError(f"{path}:1: header must be pair_index,fold")
    folds = np.zeros(n_pairs, dtype=np.int64)
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            i, f = int(row[0]), int(row[1])
        except (ValueError, IndexError):
            raise DatasetFormatError(f"{path}:{lineno}: malformed row") from None
        if not 0 <= i < n_pairs or f < 1:
            raise DatasetFormatError(f"{path}:{lineno}: pair index or fold out of range")
        folds[i] = f
    return folds


def load_manifest(path):
    path = Path(path)
    if not path.is_file():
        raise DatasetFormatError(f"{path}: file not found")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    for key in ("views", "pairs"):
        if key not in manifest:
            raise DatasetFormatError(f"{path}: manifest lacks {key!r}")
    if not manifest["views"]:
        raise DatasetFormatError(f"{path}: manifest lists no views")
    return manifest


def _resolve(base, p):
    p = Path(p)
    return p if p.is_absolute() else base / p


def load_features(manifest_path):
    """Load only the samples of a manifest (no pair file needed)."""
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    base = manifest_path.parent
    dim = manifest.get("dim")
    names, blocks, ids = [], [], None
    first_view = None
    for view in manifest["views"]:
        vpath = _resolve(base, view["path"])
        vids, block = read_features(vpath)
        if dim is None:
            dim = block.shape[1]
            first_view = view["name"]
        elif block.shape[1] != dim:
            other = first_view or "manifest dim"
            raise DatasetFormatError(
                f"{vpath}: dimension mismatch: view {view['name']!r} has {block.shape[1]} "
                f"features but {other!r} has {dim}")
        if first_view is None:
            first_view = view["name"]
        if ids is None:
            ids = vids
        elif vids != ids:
            raise DatasetFormatError(f"{vpath}: sample ids differ from view {names[0]!r}")
        names.append(view["name"])
        blocks.append(block)
    samples = np.stack(blocks, axis=2)
    return Dataset(samples, ids, names), manifest


def load_dataset(manifest_path):
    """Load ``(Dataset, PairSet)`` described by a manifest.

    Samples are ``d x V`` tensors whose column ``v`` is view ``v``.
    """
    manifest_path = Path(manifest_path)
    ds, manifest = load_features(manifest_path)
    base = manifest_path.parent
    id_index = {sid: i for i, sid in enumerate(ds.ids)}
    index, labels, folds = read_pairs(_resolve(base, manifest["pairs"]), id_index)
    if manifest.get("folds"):
        folds = read_folds(_resolve(base, manifest["folds"]), len(index))
    if np.any(folds == 0):
        if np.any(folds != 0):
            raise DatasetFormatError(f"{manifest['pairs']}: fold column partly empty")
        folds = assign_folds(labels, int(manifest.get("n_folds", 5)), int(manifest.get("seed", 0)))
    pairs = PairSet(index, labels, folds)
    try:
        pairs.validate(len(ds))
    except ValueError as exc:
        raise DatasetFormatError(f"{manifest['pairs']}: {exc}") from None
    return ds, pairs


def write_dataset(ds, pairs, out_dir, seed=0):
    """Write a dataset as manifest + per-view feature files + pair file.

    Returns the manifest path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if ds.samples.ndim != 3:
        raise ValueError("only d x V view-stacked samples can be written")
    d, V = ds.shape
    views = list(ds.views) or [f"view{v + 1}" for v in range(V)]
    entries = []
    for v, name in enumerate(views):
        fname = f"{name}.csv"
        rows = ([sid] + [_fmt(x) for x in ds.samples[i, :, v]] for i, sid in enumerate(ds.ids))
        atomic_write_text(out_dir / fname,
                          _csv_text(["id"] + [f"f{j + 1}" for j in range(d)], rows))
        entries.append({"name": name, "path": fname})
    pair_rows = ([ds.ids[a], ds.ids[b], int(l), int(f)]
                 for (a, b), l, f in zip(pairs.index, pairs.labels, pairs.folds))
    atomic_write_text(out_dir / "pairs.csv",
                      _csv_text(["left_id", "right_id", "label", "fold"], pair_rows))
    manifest = {"views": entries, "pairs": "pairs.csv", "folds": None, "dim": d, "seed": seed}
    path = out_dir / "manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2) + "\n")
    return path


def dataset_digest(ds, pairs):
    """SHA-256 over sample values, ids and pair table."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.samples, dtype="<f8").tobytes())
    h.update("\n".join(ds.ids).encode())
    for arr in (pairs.index, pairs.labels, pairs.folds):
        h.update(np.ascontiguousarray(arr, dtype="<i8").tobytes())
    return h.hexdigest()


# ------------------------------------------------------------- scores / reports

def scores_csv(scored):
    return _csv_text(["pair_id", "score", "label", "fold"],
                     ([p.pair_id, _fmt(p.score), p.label, p.fold] for p in scored))


def report_csv(report):
    rows = []
    for row in report.rows:
        for f in row.folds:
            rows.append([row.method, f.fold, _fmt(f.accuracy)])
        rows.append([row.method, "mean", _fmt(row.mean)])
    return _csv_text(["method", "fold", "accuracy"], rows)


def roc_csv(roc):
    return _csv_text(["threshold", "fpr", "tpr"],
                     ([_fmt(t), _fmt(x), _fmt(y)] for t, x, y in roc.points))


# ------------------------------------------------------------------ bundles

def _matrix_text(m):
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    lines = [f"{m.shape[0]},{m.shape[1]}"]
    lines += [",".join(_fmt(x) for x in row) for row in m]
    return "\n".join(lines) + "\n"


def _parse_matrix(text, name):
    lines = text.splitlines()
    try:
        rows, cols = (int(x) for x in lines[0].split(","))
        data = [[float(x) for x in line.split(",")] for line in lines[1:]]
        m = np.array(data, dtype=np.float64)
    except (ValueError, IndexError):
        raise BundleError(f"{name}: malformed matrix file") from None
    if m.shape != (rows, cols) and not (rows * cols == 0 and m.size == 0):
        raise BundleError(f"{name}: shape header {rows}x{cols} does not match data")
    return m.reshape(rows, cols)


def save_model(model, path):
    """Write ``model`` as a bundle directory (replaced atomically)."""
    path = Path(path)
    files = {}
    header = {
        "format": "kinverify-bundle",
        "version": BUNDLE_VERSION,
        "method": model.method,
        "input_shape": list(model.input_shape),
        "flatten": model.flatten,
        "n_modes": 0 if model.projections is None else len(model.projections),
        "wccn": model.wccn is not None,
        "info": model.info,
    }
    if model.projections is not None:
        for k, w in enumerate(model.projections, start=1):
            files[f"W_{k}.csv"] = _matrix_text(w)
        if model.wccn is not None:
            header["wccn_ridges"] = list(model.wccn.ridges)
            for k in range(len(model.projections)):
                files[f"G_{k + 1}.csv"] = _matrix_text(model.wccn.g_per_mode[k])
                files[f"C_{k + 1}.csv"] = _matrix_text(model.wccn.c_per_mode[k])
                files[f"D_{k + 1}.csv"] = _matrix_text(model.wccn.d_per_mode[k])
    files["header.json"] = json.dumps(header, indent=2, sort_keys=True) + "\n"
    sums = "".join(f"{hashlib.sha256(text.encode()).hexdigest()}  {name}\n"
                   for name, text in sorted(files.items()))
    files[CHECKSUM_FILE] = sums

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(dir=path.parent, prefix=f".{path.name}."))
    try:
        for name, text in files.items():
            (tmp / name).write_text(text)
        if path.exists():
            shutil.rmtree(path)
        os.replace(tmp, path)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return path


def load_model(path):
    """Load a bundle written by :func:`save_model`, verifying checksums."""
    path = Path(path)
    sums_path = path / CHECKSUM_FILE
    if not sums_path.is_file():
        raise BundleError(f"{path}: missing {CHECKSUM_FILE}")
    texts = {}
    for line in sums_path.read_text().splitlines():
        try:
            digest, name = line.split("  ", 1)
        except ValueError:
            raise BundleError(f"{sums_path}: malformed checksum line") from None
        fpath = path / name
        if not fpath.is_file():
            raise BundleError(f"{fpath}: missing bundle file")
        text = fpath.read_text()
        if hashlib.sha256(text.encode()).hexdigest() != digest:
            raise BundleError(f"{fpath}: checksum mismatch (corrupt bundle)")
        texts[name] = text
    if "header.json" not in texts:
        raise BundleError(f"{path}: header.json not covered by checksums")
    header = json.loads(texts["header.json"])
    if header.get("format") != "kinverify-bundle" or header.get("version") != BUNDLE_VERSION:
        raise BundleError(f"{path}: unsupported bundle version {header.get('version')!r}")

    def mat(name):
        if name not in texts:
            raise BundleError(f"{path}: missing {name}")
        return _parse_matrix(texts[name], name)

    n = header["n_modes"]
    projections = [mat(f"W_{k}.csv") for k in range(1, n + 1)] if n else None
    stack = None
    if header["wccn"]:
        stack = WccnStack([mat(f"G_{k}.csv") for k in range(1, n + 1)],
                          [mat(f"C_{k}.csv") for k in range(1, n + 1)],
                          [mat(f"D_{k}.csv") for k in range(1, n + 1)],
                          header.get("wccn_ridges", []))
    return VerificationModel(header["method"], tuple(header["input_shape"]), projections,
                             header["flatten"], stack, header.get("info", {}))
