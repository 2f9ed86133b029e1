#!/usr/bin/env python3
"""Convert .npy arrays to TSR1 tensor files.

This is the offline path for getting real images into rdmnet: decode and
resize them with any imaging library, save [C, H, W] float arrays as .npy,
then convert. Values are stored as float32.

Usage:
    # One file
    python scripts/npy_to_tsr.py image.npy --out images/

    # A batch [N, C, H, W] split into one TSR1 file per image
    python scripts/npy_to_tsr.py stimuli.npy --out images/ --split
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from rdmnet.autograd.tensor import Tensor
from rdmnet.storage.tensor_file import save_tensor


def main() -> int:
    parser = argparse.ArgumentParser(description="Convert .npy arrays to TSR1 files")
    parser.add_argument("inputs", type=Path, nargs="+", help=".npy files")
    parser.add_argument("--out", type=Path, required=True, help="Output directory")
    parser.add_argument("--split", action="store_true", help="Split the first axis into separate images")
    args = parser.parse_args()

    written = 0
    for source in args.inputs:
        array = np.load(source, allow_pickle=False)
        if args.split:
            for index, image in enumerate(array):
                save_tensor(args.out / f"{source.stem}_{index:04d}.tsr", Tensor(image, dtype=np.float32))
                written += 1
        else:
            save_tensor(args.out / f"{source.stem}.tsr", Tensor(array, dtype=np.float32))
            written += 1

    print(f"Wrote {written} TSR1 files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
