"""
Synthetic RDM-recovery fixtures.

Each image is a linear embedding of a random low-dimensional latent code
into pixel space, rescaled to [0, 1]. The ground-truth RDM is the
min-max-normalized Euclidean distance between latent codes, so a model that
learns to undo the embedding can recover it from the pixels alone.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.spatial.distance import pdist

from rdmnet.autograd.tensor import Array, Tensor
from rdmnet.config import dump_run_config
from rdmnet.rsa.rdm import Rdm, UpperTriangle, normalize_rdm
from rdmnet.storage.rdm_csv import write_rdm_csv
from rdmnet.storage.tensor_file import save_tensor


@dataclass
class SyntheticFixture:
    images: list[Tensor]
    heldout_images: list[Tensor]
    latents: Array
    target: Rdm
    heldout_target: Rdm
    subjects: list[Rdm] = field(default_factory=list)


def latent_rdm(latents: Array) -> Rdm:
    """Normalized Euclidean-distance RDM of row vectors."""
    distances = pdist(np.asarray(latents, dtype=np.float64), metric="euclidean")
    return normalize_rdm(UpperTriangle(latents.shape[0], distances).to_rdm())


def make_synthetic(
    n_train: int = 24,
    n_heldout: int = 12,
    latent_dim: int = 8,
    image_shape: tuple[int, int, int] = (3, 32, 32),
    n_subjects: int = 0,
    noise: float = 0.1,
    seed: int = 0,
) -> SyntheticFixture:
    """
    Build training and held-out images from one shared embedding.

    Args:
        n_train: Training images (>= 3)
        n_heldout: Held-out images from the same embedding (0 allowed, else >= 3)
        latent_dim: Size of the latent codes
        image_shape: Per-image [C, H, W]
        n_subjects: Noisy copies of the training RDM to emit as subject RDMs
        noise: Noise standard deviation relative to the std of the clean distances
        seed: Seed for every random draw
    """
    rng = np.random.default_rng(seed)
    total = n_train + n_heldout
    pixels = int(np.prod(image_shape))

    latents = rng.standard_normal((total, latent_dim))
    embedding = rng.standard_normal((latent_dim, pixels)) / np.sqrt(latent_dim)
    flat = latents @ embedding
    low, high = flat.min(), flat.max()
    flat = (flat - low) / (high - low)
    stacked = flat.reshape(total, *image_shape).astype(np.float32)
    images = [Tensor(image) for image in stacked]

    train_latents = latents[:n_train]
    fixture = SyntheticFixture(
        images=images[:n_train],
        heldout_images=images[n_train:],
        latents=latents,
        target=latent_rdm(train_latents),
        heldout_target=latent_rdm(latents[n_train:]) if n_heldout else latent_rdm(train_latents),
    )

    clean = pdist(train_latents, metric="euclidean")
    scale = noise * float(clean.std())
    for _ in range(n_subjects):
        noisy = np.maximum(clean + scale * rng.standard_normal(clean.size), 0.0)
        fixture.subjects.append(UpperTriangle(n_train, noisy).to_rdm())
    return fixture


def write_fixture(
    fixture: SyntheticFixture,
    root: Path,
    train: Mapping[str, Any] | None = None,
    model: Mapping[str, Any] | None = None,
) -> Path:
    """
    Write a fixture as a runnable directory and return its config path.

    Layout::

        images/img_000.tsr ...     training images
        heldout/img_000.tsr ...    held-out images
        rdms/subject_00.csv ...    subject RDMs (the clean target if there are none)
        heldout_target.csv
        run.toml                   paths relative to ``root``
    """
    for folder, images in (("images", fixture.images), ("heldout", fixture.heldout_images)):
        for index, image in enumerate(images):
            save_tensor(root / folder / f"img_{index:03d}.tsr", image)

    subjects = fixture.subjects or [fixture.target]
    rdm_names = []
    for index, rdm in enumerate(subjects):
        name = f"rdms/subject_{index:02d}.csv"
        write_rdm_csv(root / name, rdm)
        rdm_names.append(name)
    write_rdm_csv(root / "heldout_target.csv", fixture.heldout_target)

    sections: dict[str, Mapping[str, Any]] = {
        "model": dict(model or {"preset": "desk"}),
        "train": dict(train or {}),
        "paths": {"images_dir": "images", "subject_rdms": rdm_names, "out_dir": "runs/latest"},
    }
    config_path = root / "run.toml"
    config_path.write_text(dump_run_config(sections), encoding="utf-8")
    return config_path
