"""biflab: a numerical laboratory for bifurcation currents, Misiurewicz
parameters, linearization chains and dimension estimates in explicit
polynomial and rational map families."""

__version__ = "0.1.0"
