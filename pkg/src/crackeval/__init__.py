"""Scoring tools for crack segmentation masks and crack/uncrack patch classifiers."""

__version__ = "0.1.0"
