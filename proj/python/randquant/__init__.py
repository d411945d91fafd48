"""Distortion-rate analysis of randomly designed scalar quantizers."""

from ._randquant import *  # noqa: F401,F403
from ._randquant import __version__  # noqa: F401
