"""Image-pair enumeration, pair datasets and seeded mini-batch iteration."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from rdmnet.autograd.tensor import Array, Tensor
from rdmnet.errors import ShapeError
from rdmnet.rsa.predict import stack_images
from rdmnet.rsa.rdm import Rdm


def make_pairs(n: int, both_orders: bool = True) -> list[tuple[int, int]]:
    """
    All ``(i, j)`` with ``i < j`` in ascending order, followed by the mirrored
    list when ``both_orders`` is set.

    Raises:
        ShapeError: If ``n < 2``.
    """
    if n < 2:
        raise ShapeError(f"make_pairs needs n >= 2, got {n}")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if both_orders:
        pairs += [(j, i) for i, j in pairs]
    return pairs


class PairSample(BaseModel):
    """One training example: image indices and their target dissimilarity."""

    model_config = ConfigDict(frozen=True)

    i: int = Field(..., ge=0)
    j: int = Field(..., ge=0)
    target: float = Field(..., ge=0)

    @model_validator(mode="after")
    def distinct(self) -> PairSample:
        if self.i == self.j:
            raise ValueError(f"a pair needs two different images, got ({self.i}, {self.j})")
        return self


class Batch(NamedTuple):
    index_a: Array
    index_b: Array
    targets: Array

    @property
    def size(self) -> int:
        return int(self.index_a.size)


class PairDataset:
    """
    Images, their (normalized) target RDM and the pairs drawn from it.

    Pairs are stored as parallel index and target arrays in ``make_pairs``
    order; ``samples`` exposes them as ``PairSample`` records.
    """

    def __init__(self, images: Sequence[Tensor] | Tensor, target: Rdm, both_orders: bool = True):
        self.images = stack_images(images)
        if self.images.ndim != 4:
            raise ShapeError(f"images must stack to [N, C, H, W], got {self.images.shape}")
        if self.images.shape[0] != target.n:
            raise ShapeError(
                f"{self.images.shape[0]} images but the target RDM is {target.n}x{target.n}"
            )
        self.target = target
        pairs = np.array(make_pairs(target.n, both_orders), dtype=np.intp)
        self.index_a = pairs[:, 0]
        self.index_b = pairs[:, 1]
        self.targets = target.matrix[self.index_a, self.index_b].astype(self.images.dtype)

    def __len__(self) -> int:
        return int(self.index_a.size)

    @property
    def n_images(self) -> int:
        return self.images.shape[0]

    @property
    def samples(self) -> list[PairSample]:
        return [
            PairSample(i=int(i), j=int(j), target=float(t))
            for i, j, t in zip(self.index_a, self.index_b, self.targets, strict=True)
        ]

    def batch(self, rows: Array) -> Batch:
        return Batch(self.index_a[rows], self.index_b[rows], self.targets[rows])


def epoch_permutation(size: int, seed: int, epoch: int) -> Array:
    """Pair order for one epoch: PCG64 seeded with ``SeedSequence([seed, epoch])``."""
    generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, epoch])))
    return generator.permutation(size)


def batch_iter(
    dataset: PairDataset,
    batch_size: int,
    seed: int,
    epoch: int,
    shuffle: bool = True,
) -> Iterator[Batch]:
    """
    Mini-batches covering every pair exactly once; the last batch may be short.

    Raises:
        ShapeError: If ``batch_size < 1``.
    """
    if batch_size < 1:
        raise ShapeError(f"batch_size must be >= 1, got {batch_size}")
    order = epoch_permutation(len(dataset), seed, epoch) if shuffle else np.arange(len(dataset))
    for start in range(0, order.size, batch_size):
        yield dataset.batch(order[start : start + batch_size])
