"""Laughter-cue topic segmentation of multiparty conversation transcripts."""

__version__ = "0.1.0"
