"""Cusp excursions of horocycle flows on the modular surface.

Hitting times, impact parameters and excursion heights via primitive lattice
points, the closed-form limit densities, and Monte-Carlo checks of the limit
laws.
"""

__version__ = "0.1.0"

from .errors import (CapacityError, ChartError, ConvergenceError, DomainError,  # noqa: E402
                     FlowRangeError, HorizonError, HoroxtError)
from .sl2core import ASZCoords, GroupElement, IwasawaCoords, UpperHalfPoint  # noqa: E402
from .lattice import LatticeBasis, PrimitiveVector, TriangleRegion  # noqa: E402
from .section import HitEvent, OrbitSpec, hit_process, sup_excursion_height  # noqa: E402
from .dist import AnalyticDensity, hall_psi, rho  # noqa: E402
