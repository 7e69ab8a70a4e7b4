"""Deterministic traffic-scene annotation, interpretation, and evaluation toolkit."""

try:
    from ._tsikit import *  # noqa: F401,F403
    from ._tsikit import __version__  # noqa: F401
except ImportError:  # running against a build tree where _tsikit sits on sys.path
    from _tsikit import *  # noqa: F401,F403
    from _tsikit import __version__  # noqa: F401
