"""FDR-controlled feature selection with flow-based conditional null sampling."""

__version__ = "0.1.0"
