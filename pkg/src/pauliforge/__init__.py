"""Measurement-based constant-depth circuits for Pauli exponentials."""

from __future__ import annotations

__version__ = "0.1.0"
