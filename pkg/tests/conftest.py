import numpy as np
import pytest

from forgeset.data import gen_blobs
from forgeset.numcore import RngStream
from forgeset.unlearn import train


@pytest.fixture(scope="session")
def blob_setup():
    """Shared separable-ish blobs task with a pretrained linear model."""
    rng = RngStream(7)
    train_ds = gen_blobs(100, 2, 2, 0.55, rng.derive(1))
    test_ds = gen_blobs(100, 2, 2, 0.55, rng.derive(2))
    theta = train(train_ds, [2, 2], 300, 0.5, rng.derive(3))
    return train_ds, test_ds, theta, rng


def rel_close(analytic, reference, rel=1e-5, floor=1e-7):
    """Entrywise |a - r| <= max(rel*|r|, floor)."""
    analytic = np.asarray(analytic)
    reference = np.asarray(reference)
    return np.all(np.abs(analytic - reference) <= np.maximum(rel * np.abs(reference), floor))
