"""Bit-exact file formats: TSR1 tensors, weight containers and CSV files."""

from rdmnet.storage.rdm_csv import format_rdm_csv, load_rdm_csv, parse_rdm_csv, write_rdm_csv
from rdmnet.storage.reports_csv import (
    format_eval_csv,
    format_history_csv,
    format_lr_curve_csv,
    write_text,
)
from rdmnet.storage.tensor_file import decode_tensor, encode_tensor, load_tensor, save_tensor
from rdmnet.storage.weights import decode_weights, encode_weights, load_weights, save_weights

__all__ = [
    "decode_tensor",
    "decode_weights",
    "encode_tensor",
    "encode_weights",
    "format_eval_csv",
    "format_history_csv",
    "format_lr_curve_csv",
    "format_rdm_csv",
    "load_rdm_csv",
    "load_tensor",
    "load_weights",
    "parse_rdm_csv",
    "save_tensor",
    "save_weights",
    "write_rdm_csv",
    "write_text",
]
