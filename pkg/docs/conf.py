"""Sphinx configuration for the evidential_ogm documentation."""

from sphinx_astropy.conf.v2 import *  # noqa: F403
from sphinx_astropy.conf.v2 import exclude_patterns, extensions

import evidential_ogm

needs_sphinx = "8.2"

# numpy-style docstrings are read by napoleon
extensions.remove("numpydoc")
extensions += [
    "myst_parser",
    "sphinx.ext.napoleon",
]

source_suffix = {
    ".rst": "restructuredtext",
    ".md": "markdown",
}
master_doc = "index"

project = "evidential_ogm"
copyright = "2026, evidential_ogm developers"
author = "evidential_ogm developers"
version = release = evidential_ogm.__version__
language = "en"

exclude_patterns += ["Thumbs.db", ".DS_Store"]

html_theme = "sphinx_book_theme"
