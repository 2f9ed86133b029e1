"""RDMs and the representational similarity analysis stack."""

from rdmnet.rsa.baseline import baseline_fit
from rdmnet.rsa.predict import predict_rdm, stack_images
from rdmnet.rsa.rdm import Rdm, UpperTriangle, group_average, normalize_rdm
from rdmnet.rsa.stats import (
    evaluate,
    explained_variance,
    noise_ceiling,
    noise_ceiling_lower,
    spearman,
    spearman_vectors,
)

__all__ = [
    "Rdm",
    "UpperTriangle",
    "baseline_fit",
    "evaluate",
    "explained_variance",
    "group_average",
    "noise_ceiling",
    "noise_ceiling_lower",
    "normalize_rdm",
    "predict_rdm",
    "spearman",
    "spearman_vectors",
    "stack_images",
]
