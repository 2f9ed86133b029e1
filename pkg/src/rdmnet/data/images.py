"""Image directories: ``*.tsr`` files of shape [C, H, W], read in filename order."""

import logging
from pathlib import Path

from rdmnet.autograd.tensor import Tensor
from rdmnet.errors import MissingInputError, ShapeError
from rdmnet.storage.tensor_file import load_tensor
from rdmnet.utils.background import ordered_map

logger = logging.getLogger(__name__)

IMAGE_SUFFIX = ".tsr"


def list_images(images_dir: Path) -> list[Path]:
    if not images_dir.is_dir():
        raise MissingInputError(f"images directory not found: {images_dir}")
    return sorted(p for p in images_dir.iterdir() if p.suffix == IMAGE_SUFFIX and p.is_file())


def load_image_dir(images_dir: Path, workers: int = 4) -> list[Tensor]:
    """
    Load every image in ``images_dir`` in lexicographic filename order.

    Raises:
        MissingInputError: If the directory is missing or holds no ``.tsr`` files.
        FormatError: If a file is not valid TSR1.
        ShapeError: If an image is not 3-D or shapes differ.
    """
    paths = list_images(images_dir)
    if not paths:
        raise MissingInputError(f"no {IMAGE_SUFFIX} files in {images_dir}")
    images = ordered_map(load_tensor, paths, workers=workers)
    for path, image in zip(paths, images, strict=True):
        if image.ndim != 3:
            raise ShapeError(f"image {path.name} has shape {image.shape}, expected [C, H, W]")
        if image.shape != images[0].shape:
            raise ShapeError(
                f"image {path.name} has shape {image.shape}, {paths[0].name} has {images[0].shape}"
            )
    logger.info(f"Loaded {len(images)} images of shape {images[0].shape} from {images_dir}")
    return images
