import numpy as np
import pytest

from synthconf import PanelData


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def small_panel(rng):
    """12 periods, 4 controls, 2 post periods; treated tracks control means."""
    controls = rng.standard_normal((12, 4))
    treated = controls.mean(axis=1) + 0.3 * rng.standard_normal(12)
    return PanelData(np.column_stack([treated, controls]), t0=10)


def random_panel(rng, n_periods=12, n_controls=4, t0=None, noise=0.3):
    controls = rng.standard_normal((n_periods, n_controls))
    treated = controls.mean(axis=1) + noise * rng.standard_normal(n_periods)
    return PanelData(
        np.column_stack([treated, controls]),
        t0=t0 if t0 is not None else n_periods - 2,
    )
