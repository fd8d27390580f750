"""
ABFinsler - (alpha, beta)-metric verification toolkit
Douglas and projective-flatness checks for two-dimensional Finsler metrics
"""

__version__ = "1.0.0"
