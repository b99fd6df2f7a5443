"""Numerical fluctuation-theory laboratory for real-valued Lévy processes.

Sinaï's condition, ladder-height Laplace exponents, Vigon's équations
amicales, generalized arc-sine laws and heavy-tail asymptotics, each
implemented twice where possible (closed form and simulation/quadrature)
so the two routes can be checked against one another.
"""

__version__ = "0.1.0"

EULER_GAMMA = 0.5772156649015329
