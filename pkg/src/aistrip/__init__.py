"""AIS trip segmentation, feature extraction and ship-type classification."""

__version__ = "0.1.0"
