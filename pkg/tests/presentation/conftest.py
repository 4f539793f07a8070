"""Files shared by the controller and CLI tests: small planted weights, a
dataset and trained Z and S directions."""

import pytest

from style_intervention.service.config import RunConfig
from style_intervention.service.pipeline import run_gen_weights, run_sample, run_train_direction

# Latent-space labels are far from linear; a weak penalty keeps every coordinate.
Z_L1 = 1e-3
SMALL_PLANTED = {
    "d_z": 16,
    "d_w": 16,
    "const_channels": 8,
    "levels": [
        {"resolution": 4, "channels": [8]},
        {"resolution": 8, "channels": [8]},
        {"resolution": 16, "channels": [8]},
    ],
}


@pytest.fixture(scope="session")
def planted_files(tmp_path_factory):
    """Return a dict of paths: weights, dataset, dir_z and dir_s."""
    root = tmp_path_factory.mktemp("planted_files")
    paths = {
        "weights": root / "weights.siv",
        "dataset": root / "data",
        "dir_z": root / "dir_z.siv",
        "dir_s": root / "dir_s.siv",
    }
    run_gen_weights(RunConfig(backend="planted", arch=SMALL_PLANTED), paths["weights"])
    run_sample(paths["weights"], paths["dataset"], RunConfig(dataset_size=300))
    for space in ("Z", "S"):
        run_train_direction(
            paths["dataset"],
            paths[f"dir_{space.lower()}"],
            RunConfig(space=space, l1_lambda=Z_L1 if space == "Z" else 0.05),
        )
    return {name: str(path) for name, path in paths.items()}
