"""Binder-space lexical semantic change toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import BinderLscError, __doc__  # noqa: F401

__version__ = "0.1.0"
