"""Numerical tolerances shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass


class NumericalError(RuntimeError):
    """A solver could not bracket or converge on a root."""


@dataclass(frozen=True)
class Tolerances:
    """Immutable solver settings; pass a modified copy via ``tol=`` to override.

    Attributes
    ----------
    omega_tol : float
        Absolute bisection tolerance on the deviation when inverting kl.
    omega_maxiter : int
        Iteration cap for that bisection.
    root_maxiter : int
        Iteration cap for the scalar bisections (lambda, saddle, xi).
    lambda_lo, lambda_hi, lambda_cap : float
        Initial bracket for the lambda root and the cap on bracket doubling.
    grid_points, refine_rounds : int
        Grid size and number of zoom rounds used when maximising the
        modulus over a range of probabilities.
    """

    omega_tol: float = 1e-12
    omega_maxiter: int = 200
    root_maxiter: int = 400
    lambda_lo: float = 1e-8
    lambda_hi: float = 1.0
    lambda_cap: float = 2.0**64
    grid_points: int = 4096
    refine_rounds: int = 3


DEFAULT_TOL = Tolerances()
