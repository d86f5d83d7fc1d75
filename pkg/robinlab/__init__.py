"""
robinlab – first Robin p-Laplacian eigenvalue with negative boundary parameter.

Solvers (radial shooting, variational minimisation) and the checks around the
p → ∞ limit: eigenvalue limit β, convergence to exp(−β d), residuals of the
limit problem and barrier brackets.
"""

__version__ = "0.1.0"
