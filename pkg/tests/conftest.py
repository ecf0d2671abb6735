import numpy as np
import pytest

from tokenprune import FeatureMatrix


@pytest.fixture
def three_tokens():
    """Hand-checkable fixture: two near-duplicates plus one orthogonal token."""
    feats = FeatureMatrix([[1.0, 0.0], [0.99, 0.14], [0.0, 1.0]])
    w = np.array([0.9, 0.8, 0.1])
    return feats, w


def random_features(seed: int, n: int, d: int) -> FeatureMatrix:
    rng = np.random.default_rng(seed)
    return FeatureMatrix(rng.standard_normal((n, d)))


def random_instance(seed: int, n: int, d: int):
    """Gaussian features plus uniform importance, the generic fuzz instance."""
    rng = np.random.default_rng(seed)
    feats = FeatureMatrix(rng.standard_normal((n, d)))
    w = rng.uniform(0.0, 1.0, size=n)
    return feats, w
