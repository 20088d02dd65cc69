"""Contextual re-ranking of music recommendations.

Thin Python surface over the C++ core: feature-space operations,
re-rank scoring, ranking metrics, the Welch t-test, and the full
experiment pipeline.
"""

try:
    from ._core import *  # noqa: F401,F403  (installed layout)
    from ._core import FEATURE_NAMES  # noqa: F401
except ImportError:  # build-tree layout: _core.so next to this package
    from _core import *  # noqa: F401,F403
    from _core import FEATURE_NAMES  # noqa: F401
