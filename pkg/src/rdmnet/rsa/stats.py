"""Rank correlation, noise ceilings and noise-normalized explained variance."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from scipy.stats import rankdata

from rdmnet.autograd.tensor import Array
from rdmnet.errors import DataError, DegenerateRdmError, ShapeError, UndefinedCorrelationError
from rdmnet.rsa.rdm import Rdm, group_average
from rdmnet.schemas.outputs import EvalReport, NoiseCeiling

logger = logging.getLogger(__name__)


def spearman_vectors(x: Array, y: Array) -> float:
    """
    Pearson correlation of average ranks.

    The result is computed from centered dot products, so swapping the
    arguments gives the identical float.

    Raises:
        ShapeError: On differing lengths.
        UndefinedCorrelationError: With fewer than 2 values or zero rank variance.
    """
    if x.shape != y.shape:
        raise ShapeError(f"spearman needs equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise UndefinedCorrelationError(f"spearman needs at least 2 values, got {x.size}")
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    cx = rx - rx.mean()
    cy = ry - ry.mean()
    sxx = float(np.dot(cx, cx))
    syy = float(np.dot(cy, cy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("spearman is undefined for a constant vector")
    r = float(np.dot(cx, cy)) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def spearman(a: Rdm, b: Rdm) -> float:
    """Spearman correlation of the upper triangles of two same-size RDMs."""
    if a.n != b.n:
        raise ShapeError(f"cannot correlate RDMs of size {a.n} and {b.n}")
    return spearman_vectors(a.upper().values, b.upper().values)


def _check_subjects(subject_rdms: Sequence[Rdm]) -> None:
    if len(subject_rdms) < 2:
        raise DataError(f"a noise ceiling needs at least 2 subjects, got {len(subject_rdms)}")
    if len({r.n for r in subject_rdms}) != 1:
        raise ShapeError("subject RDMs differ in size")
    for index, rdm in enumerate(subject_rdms):
        upper = rdm.upper().values
        if upper.min() == upper.max():
            raise DegenerateRdmError(f"subject {index} RDM is constant")


def noise_ceiling_lower(subject_rdms: Sequence[Rdm]) -> float:
    """Mean over subjects of spearman(subject, mean of the other subjects)."""
    _check_subjects(subject_rdms)
    scores = [
        spearman(rdm, group_average([r for k, r in enumerate(subject_rdms) if k != s]))
        for s, rdm in enumerate(subject_rdms)
    ]
    return float(np.mean(scores))


def noise_ceiling(subject_rdms: Sequence[Rdm]) -> NoiseCeiling:
    """Leave-one-out lower bound and the including-self upper bound."""
    lower = noise_ceiling_lower(subject_rdms)
    everyone = group_average(subject_rdms)
    upper = float(np.mean([spearman(rdm, everyone) for rdm in subject_rdms]))
    return NoiseCeiling(lower=lower, upper=upper)


def explained_variance(r: float, ceiling: float) -> float:
    """
    Noise-normalized correlation squared, in percent: 100 * (r / ceiling)^2.

    Raises:
        DataError: If ``ceiling`` is not positive.
    """
    if not ceiling > 0:
        raise DataError(f"explained variance needs a positive noise ceiling, got {ceiling!r}")
    ratio = r / ceiling
    return 100.0 * ratio * ratio


def evaluate(
    pred: Rdm,
    targets: Sequence[Rdm],
    target_name: str,
    ceiling: float | None = None,
) -> EvalReport:
    """
    Compare a predicted RDM against one or more target RDMs.

    With two or more targets the comparison is against their group average
    and the ceiling is their leave-one-out lower bound. With one target the
    ceiling is ``ceiling`` if given, otherwise the report carries none.
    """
    if not targets:
        raise DataError("evaluate needs at least one target RDM")
    lower = upper = None
    if len(targets) >= 2:
        bounds = noise_ceiling(targets)
        lower, upper = bounds.lower, bounds.upper
        target = group_average(targets)
    else:
        lower = ceiling
        target = targets[0]

    r = spearman(pred, target)
    explained = None
    if lower is not None and lower > 0:
        explained = explained_variance(r, lower)
    elif lower is not None:
        logger.warning(f"noise ceiling {lower:.4f} is not positive, explained variance left empty")
    if r < 0 and explained is not None:
        logger.warning(f"{target_name}: negative correlation {r:.4f} squared into explained variance")
    return EvalReport(
        target_name=target_name,
        spearman_r=r,
        noise_ceiling_lower=lower,
        noise_ceiling_upper=upper,
        explained_variance_pct=explained,
    )
