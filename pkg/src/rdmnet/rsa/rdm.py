"""Representational dissimilarity matrices and their canonical upper-triangle form."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from rdmnet.autograd.tensor import Array
from rdmnet.errors import DegenerateRdmError, RdmValidationError

SYMMETRY_TOL = 1e-6
DIAGONAL_TOL = 1e-9


class UpperTriangle:
    """
    Entries ``d[i][j]`` for ``i < j``, row-major (i ascending, then j).

    This is the flattening every correlation in the package works on.
    """

    __slots__ = ("n", "values")

    def __init__(self, n: int, values: ArrayLike):
        array = np.array(values, dtype=np.float64).reshape(-1)
        if n < 2:
            raise RdmValidationError(f"an RDM needs n >= 2, got {n}")
        if array.size != n * (n - 1) // 2:
            raise RdmValidationError(
                f"upper triangle of n={n} has {n * (n - 1) // 2} entries, got {array.size}"
            )
        array.setflags(write=False)
        self.n = n
        self.values: Array = array

    def __len__(self) -> int:
        return int(self.values.size)

    def to_rdm(self) -> Rdm:
        """Reassemble the symmetric matrix with a zero diagonal."""
        matrix = np.zeros((self.n, self.n), dtype=np.float64)
        rows, cols = np.triu_indices(self.n, k=1)
        matrix[rows, cols] = self.values
        matrix[cols, rows] = self.values
        return Rdm(matrix)


class Rdm:
    """
    Validated n x n dissimilarity matrix (float64, read-only).

    On construction the matrix must be square with n >= 2, finite,
    non-negative and symmetric within 1e-6; diagonal entries within 1e-9
    of zero are then set to exactly 0.

    Raises:
        RdmValidationError: When any of the above does not hold.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix: ArrayLike):
        d = np.array(matrix, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise RdmValidationError(f"RDM must be a square matrix, got shape {d.shape}")
        if d.shape[0] < 2:
            raise RdmValidationError(f"RDM needs n >= 2, got n={d.shape[0]}")
        if not np.all(np.isfinite(d)):
            raise RdmValidationError("RDM contains non-finite entries")
        diag = np.abs(np.diagonal(d))
        if np.any(diag > DIAGONAL_TOL):
            i = int(np.argmax(diag))
            raise RdmValidationError(f"RDM diagonal entry {i} is {d[i, i]!r}, expected 0")
        np.fill_diagonal(d, 0.0)
        if np.any(d < 0):
            i, j = np.argwhere(d < 0)[0]
            raise RdmValidationError(f"RDM entry ({i}, {j}) is negative: {d[i, j]!r}")
        asym = np.abs(d - d.T)
        if np.any(asym > SYMMETRY_TOL):
            i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
            raise RdmValidationError(
                f"RDM is not symmetric at ({i}, {j}): {d[i, j]!r} vs {d[j, i]!r}"
            )
        d.setflags(write=False)
        self.matrix: Array = d

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    def upper(self) -> UpperTriangle:
        rows, cols = np.triu_indices(self.n, k=1)
        return UpperTriangle(self.n, self.matrix[rows, cols])

    def off_diagonal(self) -> Array:
        """Every off-diagonal entry, both halves."""
        return self.matrix[~np.eye(self.n, dtype=bool)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Rdm):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Rdm(n={self.n})"


def normalize_rdm(rdm: Rdm) -> Rdm:
    """
    Min-max map off-diagonal entries to [0, 1]; the diagonal stays 0.

    Raises:
        DegenerateRdmError: If all off-diagonal entries are equal.
    """
    off = rdm.off_diagonal()
    low, high = float(off.min()), float(off.max())
    if high == low:
        raise DegenerateRdmError(f"RDM off-diagonal entries are all {low!r}")
    scaled = (rdm.matrix - low) / (high - low)
    np.fill_diagonal(scaled, 0.0)
    return Rdm(scaled)


def group_average(rdms: Sequence[Rdm]) -> Rdm:
    """
    Elementwise mean of same-size RDMs.

    Raises:
        RdmValidationError: On an empty list or differing sizes.
    """
    if not rdms:
        raise RdmValidationError("group_average needs at least one RDM")
    sizes = {r.n for r in rdms}
    if len(sizes) != 1:
        raise RdmValidationError(f"cannot average RDMs of different sizes {sorted(sizes)}")
    stacked = np.stack([r.matrix for r in rdms])
    return Rdm(stacked.sum(axis=0) / len(rdms))
