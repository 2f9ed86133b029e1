"""Pytest fixtures for rdmnet tests."""

from pathlib import Path

import numpy as np
import pytest

from rdmnet.autograd import Tensor
from rdmnet.data import PairDataset, make_synthetic, write_fixture
from rdmnet.model import build_model
from rdmnet.rsa import Rdm, UpperTriangle, normalize_rdm
from rdmnet.schemas import ConvLayer, ConvSpec, HeadSpec, ModelSpec, PoolSpec, ReluLayer

TINY_SHAPE = (3, 8, 8)


def tiny_spec(**updates) -> ModelSpec:
    """3x8x8 input, two stride-2 convs to 8x2x2, 4-group head, 4-input linear layer."""
    spec = ModelSpec(
        input_shape=TINY_SHAPE,
        body=[
            ConvLayer(in_channels=3, out_channels=4, stride=2, padding=1),
            ReluLayer(),
            ConvLayer(in_channels=4, out_channels=8, stride=2, padding=1),
        ],
        head=HeadSpec(
            group_conv=ConvSpec(in_channels=16, out_channels=4, padding=1, groups=4),
            pool=PoolSpec(kernel=2, stride=2),
            linear_in=4,
        ),
        interleave_groups=4,
    )
    return spec.model_copy(update=updates) if updates else spec


def random_rdm(rng: np.random.Generator, n: int) -> Rdm:
    return UpperTriangle(n, rng.uniform(0.0, 1.0, n * (n - 1) // 2)).to_rdm()


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(0)


@pytest.fixture
def small_spec():
    """Tiny model spec that runs in milliseconds."""
    return tiny_spec()


@pytest.fixture
def small_model(small_spec):
    """Tiny float32 model, seed 0."""
    return build_model(small_spec, seed=0)


@pytest.fixture
def small_model64(small_spec):
    """Tiny float64 model for gradient checks."""
    return build_model(small_spec, seed=0, dtype=np.float64)


@pytest.fixture
def small_images(rng):
    """Five random 3x8x8 images in [0, 1]."""
    return [Tensor(rng.uniform(0.0, 1.0, TINY_SHAPE).astype(np.float32)) for _ in range(5)]


@pytest.fixture
def small_dataset(rng, small_images):
    """Pairs over the five images with a random normalized target."""
    return PairDataset(small_images, normalize_rdm(random_rdm(rng, 5)))


@pytest.fixture
def fixture_dir(tmp_path: Path) -> Path:
    """On-disk synthetic fixture (6 train, 3 held-out images) wired to the tiny spec."""
    fixture = make_synthetic(n_train=6, n_heldout=3, image_shape=TINY_SHAPE, n_subjects=2, seed=0)
    write_fixture(
        fixture,
        tmp_path / "fixture",
        train={
            "lr": 0.01,
            "batch_size": 8,
            "epochs_frozen": 1,
            "epochs_unfrozen": 2,
            "seed": 0,
        },
        model=tiny_spec().model_dump(mode="json", exclude_none=True),
    )
    return tmp_path / "fixture"
