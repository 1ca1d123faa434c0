"""Interval helpers used by the experiment reports."""

from ..stats import wilson_interval

__all__ = ["wilson_interval"]
