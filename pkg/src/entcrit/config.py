"""Numerical tolerances shared by every module.

All thresholds live in one frozen record so tests and the CLI agree on what
"valid" means. Override by constructing a new ``Tolerances`` and passing it
where a function accepts ``tol=``.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10          # max |m - m^dagger| entry
    trace: float = 1e-10         # |Tr rho - 1|
    psd: float = 1e-9            # eigenvalues must be >= -psd
    norm: float = 1e-10          # |sum |a_i|^2 - 1| for pure states
    simplex: float = 1e-10       # Bell-diagonal weight simplex
    unitary: float = 1e-10       # max |U^dagger U - I| entry
    ppt: float = 1e-9            # partial-transpose eigenvalue floor
    jacobi_offdiag: float = 1e-12
    jacobi_max_sweeps: int = 100
    # eigenvalues of rho below this are treated as exact zeros when forming
    # the spin-flip matrix
    spinflip_clip: float = 1e-15


TOL = Tolerances()


class ValidationError(ValueError):
    """An object violates a domain invariant (not Hermitian, not unit trace, ...)."""


class UsageError(ValueError):
    """An argument is outside its documented range."""
