import os
import sys

sys.path.insert(0, os.path.abspath("../../src"))

project = "Doublet"
copyright = "2026, Rodrigo Ezequiel Roldán"
author = "Rodrigo Ezequiel Roldán"
import doublet

release = doublet.__version__

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "myst_parser",
]

myst_heading_anchors = 3

templates_path = ["_templates"]
exclude_patterns: list[str] = [
    "README.md",
]

html_title = f"Doublet {release}"
html_baseurl = "https://roldriel.github.io/doublet/"
html_theme = "furo"
html_static_path = ["_static"]
html_theme_options = {
    "source_repository": "https://github.com/roldriel/doublet",
    "source_branch": "master",
    "source_directory": "docs/source/",
}
