"""Regression baseline: best linear combination of layer RDMs for a target RDM."""

from __future__ import annotations

import logging
import warnings
from collections.abc import Sequence

import numpy as np
import scipy.linalg

from rdmnet.errors import ShapeError, SingularSystemError
from rdmnet.rsa.rdm import Rdm, UpperTriangle
from rdmnet.rsa.stats import spearman
from rdmnet.schemas.outputs import BaselineFit

logger = logging.getLogger(__name__)

RIDGE = 1e-8


def baseline_fit(layer_rdms: Sequence[Rdm], target: Rdm, ridge: float = RIDGE) -> tuple[BaselineFit, Rdm]:
    """
    Fit ``sum_k w_k * triu(layer_k) + w_0`` to ``triu(target)`` by least squares.

    The normal equations ``(X^T X + ridge * I) w = X^T y`` are solved with
    the intercept as the last column of X. The fitted RDM is rebuilt from the
    combined upper triangle, clamped below at 0.

    Returns:
        The weights, intercept and fit Spearman, and the fitted RDM.

    Raises:
        ShapeError: If there are no layer RDMs or sizes differ from the target.
        SingularSystemError: If the damped system still cannot be solved.
    """
    if not layer_rdms:
        raise ShapeError("baseline_fit needs at least one layer RDM")
    for index, layer in enumerate(layer_rdms):
        if layer.n != target.n:
            raise ShapeError(f"layer RDM {index} has n={layer.n}, target has n={target.n}")

    y = target.upper().values
    columns = [layer.upper().values for layer in layer_rdms]
    design = np.column_stack([*columns, np.ones_like(y)])
    gram = design.T @ design + ridge * np.eye(design.shape[1])
    rhs = design.T @ y

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", scipy.linalg.LinAlgWarning)
        try:
            solution = scipy.linalg.solve(gram, rhs, assume_a="pos")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularSystemError(f"baseline normal equations are singular: {exc}") from exc
    for warning in caught:
        logger.warning(f"baseline system is ill-conditioned: {warning.message}")
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError("baseline solution is not finite")

    combined = np.maximum(design @ solution, 0.0)
    fitted = UpperTriangle(target.n, combined).to_rdm()
    fit = BaselineFit(
        weights=[float(w) for w in solution[:-1]],
        intercept=float(solution[-1]),
        spearman_r=spearman(fitted, target),
    )
    return fit, fitted
