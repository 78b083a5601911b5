"""Dataset preparation, model training, and plotting companion for the worstgroup harness."""

__version__ = "0.1.0"
