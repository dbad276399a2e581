"""Learning-to-defer machinery: deferral losses, exact ERM over finite
classes, a consistent cost-sensitive surrogate family, and version-space
active learning. Thin re-export of the compiled module."""

from ._deferlab import *  # noqa: F401,F403
from ._deferlab import __doc__ as __doc__  # noqa: F401

__version__ = "0.1.0"
