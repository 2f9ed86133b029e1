"""Model-predicted RDMs."""

from collections.abc import Sequence

import numpy as np

from rdmnet.autograd import ops
from rdmnet.autograd.tensor import Tensor
from rdmnet.errors import ShapeError
from rdmnet.model.siamese import SiameseModel, body_forward, head_forward
from rdmnet.rsa.rdm import Rdm, UpperTriangle

PAIR_CHUNK = 1024


def stack_images(images: Sequence[Tensor] | Tensor) -> Tensor:
    """[C, H, W] tensors (or an already stacked batch) as one [N, C, H, W] tensor."""
    if isinstance(images, Tensor):
        return images
    if not images:
        raise ShapeError("no images given")
    shapes = {image.shape for image in images}
    if len(shapes) != 1:
        raise ShapeError(f"images differ in shape: {sorted(shapes)}", layer_id="input")
    return Tensor(np.stack([image.data for image in images]))


def predict_rdm(model: SiameseModel, images: Sequence[Tensor] | Tensor) -> Rdm:
    """
    Predicted RDM over ``images``.

    ``d[i][j] = d[j][i] = max(0, (f(i, j) + f(j, i)) / 2)`` where ``f`` is
    the model's pair prediction; the body runs once per image.

    Raises:
        ShapeError: Fewer than 2 images or images that do not fit the model.
    """
    batch = stack_images(images)
    n = batch.shape[0]
    if n < 2:
        raise ShapeError(f"predict_rdm needs at least 2 images, got {n}")
    features = body_forward(model, batch)
    rows, cols = np.triu_indices(n, k=1)
    upper = np.empty(rows.size, dtype=np.float64)
    for start in range(0, rows.size, PAIR_CHUNK):
        i = rows[start : start + PAIR_CHUNK]
        j = cols[start : start + PAIR_CHUNK]
        feat_i = ops.gather(features, i)
        feat_j = ops.gather(features, j)
        forward = head_forward(model, feat_i, feat_j).data.astype(np.float64)
        backward = head_forward(model, feat_j, feat_i).data.astype(np.float64)
        upper[start : start + i.size] = (forward + backward) / 2.0
    return UpperTriangle(n, np.maximum(upper, 0.0)).to_rdm()
