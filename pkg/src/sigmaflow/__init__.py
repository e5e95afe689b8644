"""Numerical laboratory for fully nonlinear sigma_k-quotient metric flows
on flat complex tori: symmetric-function calculus, cone-condition checks,
energy functionals, an explicit flow integrator, and a randomized
property-test suite for the underlying algebraic inequalities."""

__version__ = "0.1.0"
