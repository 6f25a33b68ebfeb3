"""
Colourspace Package

Exact counting, sampling and solution-space geometry for proper colourings
of sparse graphs, together with the analytic bounds they are checked against.
Each module handles one aspect of the pipeline.
"""

__version__ = "1.0.0"
__description__ = "Colourspace - random proper colourings of sparse graphs"
