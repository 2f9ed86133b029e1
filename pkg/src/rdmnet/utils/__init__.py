"""Shared helpers for rdmnet."""

from rdmnet.utils.background import ordered_map

__all__ = ["ordered_map"]
