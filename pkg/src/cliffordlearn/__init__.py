"""Query-counted learning and testing of Clifford and C_k unitaries."""

__version__ = "0.1.0"
