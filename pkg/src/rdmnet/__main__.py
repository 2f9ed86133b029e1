"""Entry point for running rdmnet as a module."""

from rdmnet.cli import app

if __name__ == "__main__":
    app()
