"""Stereo rig self-recalibration by maximizing the valid-disparity count."""

__version__ = "0.1.0"
