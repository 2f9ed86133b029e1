"""Tests for rdmnet."""
