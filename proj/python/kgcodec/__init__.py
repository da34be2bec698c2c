try:
    from ._kgcodec import *  # noqa: F401,F403
    from ._kgcodec import __doc__  # noqa: F401
except ImportError:  # pragma: no cover - flat layout during development
    from _kgcodec import *  # noqa: F401,F403

__version__ = "0.1.0"
