"""Zeroth-order optimization with trace-of-Hessian regularization.

Thin re-export of the compiled extension.  The two-point estimator
g = [(f(x + lu) - f(x - lu)) / (2l)] u is, in expectation, the gradient of
f plus (l^2/2) times the gradient of tr(hess f), so running SGD on it drifts
toward flat minima; the classes and functions here expose the problems,
estimators, optimizer loops and diagnostics that measure exactly that.
"""

from zoflat._core import *  # noqa: F401,F403
from zoflat._core import __doc__  # noqa: F401
