"""Particle size distribution from laser speckle autocorrelation."""

from ._core import *  # noqa: F401,F403
from ._core import SpeckleError  # noqa: F401
