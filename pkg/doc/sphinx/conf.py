# --------------------------------------------------------------------------------------------------
# Copyright (c) The elliptic-sectors authors. All rights reserved.
#
# This file is part of the elliptic-sectors project, a desk-scale verification lab for sectorial
# elliptic forms under mixed boundary conditions.
# https://github.com/elliptic-sectors/elliptic-sectors
# --------------------------------------------------------------------------------------------------

"""
Configuration file for the Sphinx documentation builder.
"""

project = "elliptic-sectors"
copyright = "The elliptic-sectors authors"
author = "The elliptic-sectors authors"

extensions = [
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx_rtd_theme",
]

intersphinx_mapping = {
    "numpy": ("https://numpy.org/doc/stable/", None),
    "python": ("https://docs.python.org/3", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
    "tsfpga": ("https://tsfpga.com", None),
}

html_theme = "sphinx_rtd_theme"

html_theme_options = {
    "prev_next_buttons_location": "both",
}
