"""Dictionary-based reduced-order models of 1D conservation laws.

The heavy lifting lives in the compiled extension; this package just
re-exports it.
"""

from ._l1rom import *  # noqa: F401,F403
from ._l1rom import __version__  # noqa: F401
