"""Desk-scale synthetic stand-in for multi-view kinship features.

Each family ``f`` has a kin latent ``z_f`` and every individual ``j`` an own
latent ``u_j``. View ``v`` of individual ``j`` in family ``f`` is

    x_v = s * A_v z_f + w * U_v u_j + n * B_v e_jv + i * g_jv

``A_v = A R_v`` mixes a shared kin subspace differently per view, ``U_v`` does
the same for a separate individual subspace, ``B_v`` is a view-specific
nuisance basis of rank ``nuisance_rank`` and ``g_jv`` is isotropic sensor
noise. ``s``, ``w``, ``n`` and ``i`` are the kin-signal strength and the
within-pair, nuisance and isotropic noise scales. Everything is drawn from
one generator seeded with ``seed``.

Parent ``f`` with child ``f`` forms a positive pair; parent ``f`` with the
child of another family forms a negative pair.
"""

from dataclasses import asdict, dataclass, fields

import numpy as np

from .pairs import Dataset, PairSet, assign_folds


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 42
    families: int = 100
    views: int = 4
    dim: int = 32
    latent: int = 8
    kin_strength: float = 1.0
    within_noise: float = 1.0
    nuisance_noise: float = 1.0
    nuisance_rank: int = 8
    isotropic_noise: float = 0.0
    pairs_per_relation: int = None
    folds: int = 5

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self):
        problems = []
        for name in ("families", "views", "dim", "latent", "nuisance_rank", "folds"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        for name in ("kin_strength", "within_noise", "nuisance_noise", "isotropic_noise"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0")
        n_pairs = self.n_pairs
        if n_pairs < 2 or n_pairs > self.families:
            problems.append(f"pairs_per_relation must be in [2, {self.families}]")
        if self.families < 2:
            problems.append("need at least 2 families for negative pairs")
        if n_pairs < self.folds:
            problems.append(f"{n_pairs} pairs cannot fill {self.folds} folds")
        return problems

    @property
    def n_pairs(self):
        return self.families if self.pairs_per_relation is None else self.pairs_per_relation

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown synth config keys: {', '.join(unknown)}")
        return cls(**data)

    def to_dict(self):
        return asdict(self)


def generate_synthetic(cfg):
    """Generate ``(Dataset, PairSet)``; a pure function of ``cfg``.

    Samples are ``dim x views`` tensors. Parents come first (ids ``fNNN_p``),
    then children (``fNNN_c``).
    """
    rng = np.random.default_rng(cfg.seed)
    d, V, r, q, F = cfg.dim, cfg.views, cfg.latent, cfg.nuisance_rank, cfg.families
    kin_basis = rng.standard_normal((d, r)) / np.sqrt(d)
    own_basis = rng.standard_normal((d, r)) / np.sqrt(d)
    kin_mix = [kin_basis @ rng.standard_normal((r, r)) for _ in range(V)]
    own_mix = [own_basis @ rng.standard_normal((r, r)) for _ in range(V)]
    nuisance = [rng.standard_normal((d, q)) / np.sqrt(d) for _ in range(V)]

    z = rng.standard_normal((F, r))
    kin = np.concatenate([z, z])
    own = rng.standard_normal((2 * F, r))
    samples = np.empty((2 * F, d, V))
    for v in range(V):
        samples[:, :, v] = (cfg.kin_strength * kin @ kin_mix[v].T
                            + cfg.within_noise * own @ own_mix[v].T
                            + cfg.nuisance_noise * rng.standard_normal((2 * F, q)) @ nuisance[v].T
                            + cfg.isotropic_noise * rng.standard_normal((2 * F, d)))

    n = cfg.n_pairs
    chosen = np.sort(rng.choice(F, size=n, replace=False))
    # a random cyclic shift of the chosen families is a derangement
    shift = rng.integers(1, n) if n > 1 else 0
    partner = np.roll(chosen, -shift)
    index = np.concatenate([np.stack([chosen, F + chosen], axis=1),
                            np.stack([chosen, F + partner], axis=1)])
    labels = np.concatenate([np.ones(n, dtype=np.int64), np.zeros(n, dtype=np.int64)])
    folds = assign_folds(labels, cfg.folds, cfg.seed)
    ids = [f"f{f:03d}_p" for f in range(F)] + [f"f{f:03d}_c" for f in range(F)]
    views = [f"view{v + 1}" for v in range(V)]
    return Dataset(samples, ids, views), PairSet(index, labels, folds)
