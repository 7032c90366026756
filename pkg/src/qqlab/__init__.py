"""qqlab - exact desk-scale laboratory for quantum query complexity.

Simulators for query algorithms plus the lower-bound methods built on them:
- hybrid arguments and block sensitivity
- polynomial method, approximate degree and dual polynomials
- recording method for SEARCH and COLLISION
- spectral adversary certificates, vector realizations and the dual SDP
- the phase-estimation algorithm compiled from a vector realization

Version: 0.1.0
"""

__version__ = "0.1.0"

from .boolfn import BooleanFunction, make_named
from .errors import QQLabError
from .models import Assertion, ExperimentReport
from .qsim import QueryAlgorithm
from .settings import settings

__all__ = [
    "__version__",
    "Assertion",
    "BooleanFunction",
    "ExperimentReport",
    "QQLabError",
    "QueryAlgorithm",
    "make_named",
    "settings",
]
