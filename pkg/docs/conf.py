#
# leadharness documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.
#
# All configuration values have a default; values that are commented out
# serve to show the default.

import leadharness

# General information about the project.
project = u'leadharness'
copyright = u'2025, the leadharness developers'
author = 'the leadharness developers'

# The full version, including alpha/beta/rc tags.
release = leadharness.__version__

# The short X.Y version.
if '+' in release:
    # Not on a tag
    version = 'main'
else:
    version = release

# -- General configuration -----------------------------------------------------

# Add any Sphinx extension module names here, as strings. They can be extensions
# coming with Sphinx (named 'sphinx.ext.*') or your custom ones.
extensions = [
    # Use this for generating API docs
    'sphinx.ext.autodoc',
    # This can parse google style docstrings
    'sphinx.ext.napoleon',
    # For linking to external sphinx documentation
    'sphinx.ext.intersphinx',
    # Add links to source code in API docs
    'sphinx.ext.viewcode',
]

# If true, Sphinx will warn about all references where the target cannot
# be found.
nitpicky = True

# Pydantic and numpy types show up in signatures but have no inventory here
nitpick_ignore = [
    ('py:func', 'int'),
    ('py:class', 'pydantic.main.BaseModel'),
    ('py:class', 'numpy.random.Generator'),
]

# Both the class’ and the __init__ method’s docstring are concatenated and
# inserted into the main body of the autoclass directive
autoclass_content = 'both'

# Order the members by the order they appear in the source code
autodoc_member_order = 'bysource'

# Don't inherit docstrings from baseclasses
autodoc_inherit_docstrings = False

# The name of a reST role (builtin or Sphinx extension) to use as the default
# role, that is, for text marked up `like this`
default_role = 'any'

# The suffix of source filenames.
source_suffix = '.rst'

# The master toctree document.
master_doc = 'index'

# List of directories, relative to source directory, that shouldn't be searched
# for source files.
exclude_trees = ['_build']

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'

# This means you can link things like `str` and `asyncio` to the relevant
# docs in the python documentation.
intersphinx_mapping = dict(
    python=('https://docs.python.org/3/', None),
    numpy=('https://numpy.org/doc/stable/', None),
)

# -- Options for HTML output ---------------------------------------------------

# The theme to use for HTML and HTML Help pages.  Major themes that come with
# Sphinx are currently 'default' and 'sphinxdoc'.
try:
    import sphinx_rtd_theme_github_versions
    html_theme = 'sphinx_rtd_theme_github_versions'
except ImportError:
    html_theme = 'default'

# If true, "Created using Sphinx" is shown in the HTML footer. Default is True.
html_show_sphinx = False

# If true, "(C) Copyright ..." is shown in the HTML footer. Default is True.
html_show_copyright = True
