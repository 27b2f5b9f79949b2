"""Rate-region toolkit for the two-user ergodic fading Gaussian broadcast channel."""

__version__ = "0.1.0"
