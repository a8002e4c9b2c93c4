"""Contact process on dynamical graphs: simulation, exact solutions and bounds."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401


def report_dict(text):
    """Parse a key=value report into a dict of strings."""
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out
