"""Unsupervised domain adaptation for multivariate time-series classification.

Two-branch feature extractor (patching transformer + multi-scale convolutions),
cross-attention fusion, and adversarial alignment losses, built on a small
float64 reverse-mode autodiff engine.
"""

__version__ = "0.1.0"
