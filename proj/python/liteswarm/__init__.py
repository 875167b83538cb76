"""Python surface of the liteswarm agent orchestration engine."""

try:
    from ._liteswarm import *  # noqa: F401,F403
except ImportError:  # extension built out-of-package (e.g. plain CMake build)
    from _liteswarm import *  # noqa: F401,F403
