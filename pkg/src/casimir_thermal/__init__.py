"""Thermal Casimir pressure and radiative heat transfer between metal plates."""
from __future__ import annotations

__version__ = "0.1.0"
