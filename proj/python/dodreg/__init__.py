"""Distribution-on-distribution regression on a discretized interval.

Probability measures are stored as quantile vectors on a shared grid;
monotone transport maps between them are closed-form in one dimension, and
the regression map minimizing the mean squared transport distance is fitted
by weighted isotonic regression. See the individual classes and functions
for details; everything is implemented in the `_core` extension module.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
