import numpy as np
import pytest

from rismimo.channel import ArrayGeometry, LinkStatistics, sample_channels
from rismimo.experiment import db_to_linear


def reference_links():
    """Link statistics from the reference deployment (6/4/3 dB, 2.4/2.5/3.5)."""
    return (
        LinkStatistics(rician_factor=db_to_linear(6.0), path_loss_exponent=2.4),
        LinkStatistics(rician_factor=db_to_linear(4.0), path_loss_exponent=2.5),
        LinkStatistics(rician_factor=db_to_linear(3.0), path_loss_exponent=3.5),
    )


def make_realization(seed=0, **geometry_kwargs):
    geo = ArrayGeometry(**geometry_kwargs)
    lt, lr, ld = reference_links()
    rng = np.random.default_rng(seed)
    return sample_channels(geo, lt, lr, ld, rng), geo


@pytest.fixture
def small_realization():
    """3x2 RIS, 2x2 MIMO: big enough to exercise shapes, cheap to run."""
    real, _ = make_realization(seed=7, n_x=3, n_y=2, m_t=2, m_r=2)
    return real
