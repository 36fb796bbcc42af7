"""
Numerical Wilson divided-difference calculus: Wilson operators on the
square-root lattice, Nevanlinna functionals on circles, Wilson counting
functions and defects, Wilson polynomials, Wilson series and residual
checks for Wilson difference and interpolation equations.
"""
