"""Poisson brackets on boundary measurements of directed planar networks in a disk."""

from __future__ import annotations

__version__ = "0.1.0"

__all__ = ["cli", "cluster", "exprcore", "faces", "measurement", "network", "poisson"]
