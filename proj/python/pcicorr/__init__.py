"""Masked pairwise feature correlation: python bindings for the native core."""

try:
    from ._pcicorr import *  # noqa: F401,F403 (installed wheel layout)
    from ._pcicorr import __version__
except ImportError:  # pragma: no cover - in-tree build layout
    from _pcicorr import *  # noqa: F401,F403
    from _pcicorr import __version__
