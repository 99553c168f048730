"""Top-level package for evidential_ogm."""

try:
    from ._version import __version__
except ImportError:  # not installed, e.g. running from a source checkout
    __version__ = "0.0.0"
