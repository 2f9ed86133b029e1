"""
RDM CSV files: n lines of n comma-separated decimal floats.

Values are written with Python's shortest round-trip ``repr``, so a
write followed by a read reproduces every float exactly.
"""

import csv
import io
from pathlib import Path

from rdmnet.errors import FormatError, MissingInputError
from rdmnet.rsa.rdm import Rdm


def parse_rdm_csv(data: bytes) -> Rdm:
    """
    Parse and validate RDM CSV bytes.

    Raises:
        FormatError: Non-UTF-8 bytes, empty input, blank or ragged rows,
            non-numeric cells, or a non-square matrix.
        RdmValidationError: A matrix that breaks the RDM invariants.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("RDM CSV is not valid UTF-8") from exc
    if not text.strip():
        raise FormatError("RDM CSV is empty")

    rows: list[list[float]] = []
    try:
        for line_no, cells in enumerate(csv.reader(io.StringIO(text)), start=1):
            if not cells:
                raise FormatError(f"RDM CSV line {line_no} is blank")
            try:
                rows.append([float(cell) for cell in cells])
            except ValueError as exc:
                raise FormatError(f"RDM CSV line {line_no} has a non-numeric cell") from exc
    except csv.Error as exc:
        raise FormatError(f"RDM CSV is malformed: {exc}") from exc

    n = len(rows)
    for line_no, row in enumerate(rows, start=1):
        if len(row) != n:
            raise FormatError(f"RDM CSV line {line_no} has {len(row)} cells, expected {n}")
    return Rdm(rows)


def load_rdm_csv(path: Path) -> Rdm:
    if not path.is_file():
        raise MissingInputError(f"RDM file not found: {path}")
    return parse_rdm_csv(path.read_bytes())


def format_rdm_csv(rdm: Rdm) -> str:
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in rdm.matrix)


def write_rdm_csv(path: Path, rdm: Rdm) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_rdm_csv(rdm), encoding="utf-8")
