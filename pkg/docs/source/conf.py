# -*- coding: utf-8 -*-
#
# Sphinx configuration of the asmm documentation.
import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

from asmm import __version__ as version  # noqa: E402

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.intersphinx']
source_suffix = '.rst'
master_doc = 'index'

project = u'asmm'
copyright = u'2024, Yelp Inc.'
release = version

autodoc_member_order = 'bysource'

pygments_style = 'sphinx'
html_theme = 'sphinxdoc'
htmlhelp_basename = 'asmmdoc'

latex_documents = [
    ('index', 'asmm.tex', u'asmm Documentation', u'Yelp Infra Team', 'manual'),
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'networkx': ('https://networkx.org/documentation/stable/', None),
    'staticconf': ('https://pystaticconfiguration.readthedocs.io/en/latest/', None),
}
