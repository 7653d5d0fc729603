"""Toolkit for building masking/concealing audio mixtures at calibrated
A-weighted levels, running best-worst-scaling listening experiments over
HTTP, and scoring the collected judgments."""

__version__ = "0.1.0"
