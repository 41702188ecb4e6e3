"""Shared fixtures.

The acceptance-scale artifacts (10 000-pair Chen dataset and the trained
3-8-3 ReLU surrogate with the default seed) are session-scoped because
several modules exercise them.
"""

import pytest

from chaosforge import ann, integrator
from chaosforge.systems import chen_system

ACCEPTANCE_DT = 0.02
ACCEPTANCE_STEPS = 10_000
ACCEPTANCE_SEED = 4


@pytest.fixture(scope="session")
def chen_dataset():
    traj = integrator.integrate(
        chen_system(), [1.0, 1.0, 1.0], ACCEPTANCE_DT, ACCEPTANCE_STEPS
    )
    return integrator.build_dataset(traj, split_ratio=0.8, normalize_flag=True)


@pytest.fixture(scope="session")
def trained(chen_dataset):
    cfg = ann.TrainConfig(rng_seed=ACCEPTANCE_SEED, epochs=200)
    model, metrics = ann.train(chen_dataset, (3, 8, 3), cfg)
    return model, metrics


@pytest.fixture(scope="session")
def trained_model(trained):
    return trained[0]
