"""Numerical tolerances shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Central tolerance record.

    Attributes
    ----------
    herm : float
        Relative tolerance for accepting a matrix as Hermitian.
    psd : float
        Smallest admissible eigenvalue of a positive operator.
    trace : float
        Allowed deviation of a state's trace from one.
    unital : float
        Allowed deviation of ``sum V^dag V`` from the identity.
    choi : float
        Smallest admissible Choi eigenvalue for complete positivity.
    trunc : float
        Allowed Fock-space tail mass.
    bound : float
        Slack used when a trade-off inequality is judged satisfied.
    """

    herm: float = 1e-12
    psd: float = 1e-10
    trace: float = 1e-12
    unital: float = 1e-10
    choi: float = 1e-9
    trunc: float = 1e-12
    bound: float = 1e-9


DEFAULT = Tolerances()
_current = DEFAULT


def get_tolerances() -> Tolerances:
    """Return the active tolerance record."""
    return _current


def set_tolerances(**overrides: float) -> Tolerances:
    """Replace selected fields of the active record and return it."""
    global _current
    _current = replace(_current, **overrides)
    return _current


def reset_tolerances() -> Tolerances:
    global _current
    _current = DEFAULT
    return _current
