"""Shared fixtures: planted and random generators, a labelled dataset and trained planes."""

import pytest

from style_intervention.domain.directions import TrainingParams, train_hyperplane
from style_intervention.domain.stylegen.arch import ArchSpec, LevelSpec
from style_intervention.domain.stylegen.planted import build_planted_generator
from style_intervention.domain.stylegen.weights import build_random_generator
from style_intervention.service.dataset import build_dataset

PLANTED_SEED = 7
DATASET_SIZE = 2000
TARGET = "red_top_left"
S_PARAMS = TrainingParams()
Z_PARAMS = TrainingParams(l1_lambda=1e-3, epochs=2000)

SMALL_ARCH = ArchSpec(
    d_z=8,
    d_w=8,
    const_channels=8,
    levels=(LevelSpec(4, (8,)), LevelSpec(8, (4, 4)), LevelSpec(16, (4,))),
)


@pytest.fixture(scope="session")
def planted():
    """Return (weights, partitions, attributes) of the seed-7 planted generator."""
    return build_planted_generator(PLANTED_SEED)


@pytest.fixture(scope="session")
def planted_weights(planted):
    return planted[0]


@pytest.fixture(scope="session")
def planted_partitions(planted):
    return {p.concept: p for p in planted[1]}


@pytest.fixture(scope="session")
def planted_dataset(planted):
    """Return 2000 labelled planted samples."""
    weights, _, attributes = planted
    return build_dataset(weights, attributes, DATASET_SIZE, PLANTED_SEED)


@pytest.fixture(scope="session")
def s_training(planted_weights, planted_dataset):
    """Return (plane, report) of the sparse S-space classifier for the target."""
    return train_hyperplane(
        planted_dataset.vectors("S"),
        planted_dataset.labels_for(TARGET),
        "S",
        S_PARAMS,
        planted_weights.arch.layout,
    )


@pytest.fixture(scope="session")
def z_training(planted_dataset):
    """Return (plane, report) of the Z-space classifier for the target."""
    return train_hyperplane(
        planted_dataset.vectors("Z"), planted_dataset.labels_for(TARGET), "Z", Z_PARAMS
    )


@pytest.fixture(scope="session")
def s_plane(s_training):
    return s_training[0]


@pytest.fixture(scope="session")
def z_plane(z_training):
    return z_training[0]


@pytest.fixture(scope="session")
def small_weights():
    """Return a random generator with a 16x16 output, cheap enough for gradient checks."""
    return build_random_generator(3, SMALL_ARCH)
