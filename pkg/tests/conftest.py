import numpy as np
import pytest

from kinverify.synth import SynthConfig, generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, d, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return (q * np.geomspace(1.0, cond, d)) @ q.T


@pytest.fixture(scope="session")
def small_synth():
    """Full-rank synthetic data (isotropic noise) with 8 x 3 samples."""
    cfg = SynthConfig(seed=42, families=64, views=3, dim=8, latent=3,
                      within_noise=1.0, nuisance_noise=1.0, nuisance_rank=2,
                      isotropic_noise=0.3, folds=4)
    return generate_synthetic(cfg)


def pytest_terminal_summary(terminalreporter):
    lines = [value for reports in terminalreporter.stats.values() for r in reports
             for key, value in getattr(r, "user_properties", ()) if key == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(set(lines)):
            terminalreporter.write_line(line)
