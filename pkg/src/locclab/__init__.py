"""Error bounds and certificates for LOCC discrimination of two quantum states."""

__version__ = "0.1.0"
