"""Discrete optimizers, their damped-oscillator flows, and convergence checks."""

from ._oscillab import *  # noqa: F401,F403
from ._oscillab import __doc__  # noqa: F401
