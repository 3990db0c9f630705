"""CLI module for segslam."""

from .main import cli, main

__all__ = ["cli", "main"]
