"""Pairs, datasets, batches, image directories and synthetic fixtures."""

from rdmnet.data.images import list_images, load_image_dir
from rdmnet.data.pairs import (
    Batch,
    PairDataset,
    PairSample,
    batch_iter,
    epoch_permutation,
    make_pairs,
)
from rdmnet.data.synthetic import SyntheticFixture, latent_rdm, make_synthetic, write_fixture

__all__ = [
    "Batch",
    "PairDataset",
    "PairSample",
    "SyntheticFixture",
    "batch_iter",
    "epoch_permutation",
    "latent_rdm",
    "list_images",
    "load_image_dir",
    "make_pairs",
    "make_synthetic",
    "write_fixture",
]
