# DocSynth documentation build configuration.

import os
import sys

sys.path.insert(0, os.path.abspath(".."))
from docsynth import __version__

# -- General configuration -----------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.viewcode",
    "pallets_sphinx_themes",
]

templates_path = ["_templates"]
source_suffix = {".rst": "restructuredtext"}
master_doc = "index"

project = "DocSynth"
copyright = "2024-2026, DocSynth team"

version = __version__
release = version

exclude_patterns = ["_build"]

add_module_names = False
autoclass_content = "both"
autodoc_member_order = "bysource"

# -- Options for HTML output ---------------------------------------------------

html_theme = "flask"
html_last_updated_fmt = "%b %d, %Y"
html_sidebars = {
    "index": ["searchbox.html"],
    "**": ["toc.html", "relations.html", "searchbox.html"],
}
htmlhelp_basename = "docsynth"

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "flask": ("https://flask.palletsprojects.com/en/stable/", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
}
