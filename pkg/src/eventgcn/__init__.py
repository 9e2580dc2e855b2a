"""Event extraction for commodity news.

Trigger detection over multi-channel token encodings plus argument-role
classification with graph convolutions over contextually pruned dependency
sub-trees, trained jointly with a weighted cross-entropy objective.
"""

__version__ = "0.1.0"
