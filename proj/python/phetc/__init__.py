"""Event-triggered port-Hamiltonian networks: simulation and LMI certification."""

from ._phetc import *  # noqa: F401,F403
from ._phetc import __doc__  # noqa: F401
