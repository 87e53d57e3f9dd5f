"""Zero-shot conversational query reformulation: resolve pronouns, then
omitted descriptions, by asking a reading-comprehension model about the
dialogue so far."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
