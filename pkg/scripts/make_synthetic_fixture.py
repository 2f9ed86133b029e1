#!/usr/bin/env python3
"""Write the synthetic RDM-recovery fixture to disk.

Images are linear embeddings of random latent codes; the target RDM is the
normalized latent distance. The directory is ready for `rdmnet train`.

Usage:
    # Default: 24 training + 12 held-out images, seed 0
    python scripts/make_synthetic_fixture.py fixtures/synthetic

    # Three noisy subject RDMs instead of the clean target
    python scripts/make_synthetic_fixture.py fixtures/noisy --subjects 3 --noise 0.2

    # Then train on it
    rdmnet train --config fixtures/synthetic/run.toml
"""

import argparse
import sys
from pathlib import Path

from rdmnet.data.synthetic import make_synthetic, write_fixture


def main() -> int:
    parser = argparse.ArgumentParser(description="Write the synthetic RDM-recovery fixture")
    parser.add_argument("out_dir", type=Path, help="Directory to create")
    parser.add_argument("--train", type=int, default=24, help="Training images")
    parser.add_argument("--heldout", type=int, default=12, help="Held-out images")
    parser.add_argument("--latent-dim", type=int, default=8, help="Latent code size")
    parser.add_argument("--subjects", type=int, default=0, help="Noisy subject RDMs to emit")
    parser.add_argument("--noise", type=float, default=0.1, help="Subject noise (relative std)")
    parser.add_argument("--seed", type=int, default=0, help="Fixture seed")
    args = parser.parse_args()

    if args.out_dir.exists() and any(args.out_dir.iterdir()):
        print(f"Refusing to write into non-empty directory {args.out_dir}", file=sys.stderr)
        return 1

    fixture = make_synthetic(
        n_train=args.train,
        n_heldout=args.heldout,
        latent_dim=args.latent_dim,
        n_subjects=args.subjects,
        noise=args.noise,
        seed=args.seed,
    )
    config_path = write_fixture(fixture, args.out_dir, train={"seed": args.seed})
    print(f"Wrote {len(fixture.images)} training and {len(fixture.heldout_images)} held-out images")
    print(f"Config: {config_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
