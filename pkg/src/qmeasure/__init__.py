"""Numerics for quantum measurement trade-offs.

Modules by topic:

- ``qmat``, ``qchan``: matrices, states and Heisenberg-picture channels.
- ``qmetrics``, ``qbounds``: quality figures and the inequalities linking them.
- ``fock``, ``dynamics_examples``: worked physical models.
- ``pointer_opt``: optimal homodyne pointers for a decaying qubit.
- ``lan_est``: two-stage adaptive qubit estimation by Monte Carlo.
"""

__version__ = "0.1.0"

from .config import Tolerances, get_tolerances, reset_tolerances, set_tolerances
from .kernels import BACKEND

__all__ = ["BACKEND", "Tolerances", "__version__", "get_tolerances", "reset_tolerances",
           "set_tolerances"]
