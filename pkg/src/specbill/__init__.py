"""Forward and inverse spectral computations for mirror-symmetric two-obstacle billiards."""

__version__ = "0.1.0"
