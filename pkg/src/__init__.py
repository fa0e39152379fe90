# corners-lab
# Python package initialization

"""
corners-lab - Corners Processes of β-Ensembles

Multilevel generalized Wishart and Jacobi samplers, multivariate Bessel and
Heckman-Opdam functions by Gelfand-Tsetlin quadrature, Macdonald q-series with their
limit checks, ensemble densities and a statistical verification harness.
"""

__version__ = "1.0.0"
