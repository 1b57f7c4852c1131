"""Super-resolution of point sources from noisy low-frequency measurements.

Submodules:

* :mod:`specres.signal` -- signals, the circle metric, matching distance, measurements
* :mod:`specres.fejer` -- Fejer kernel and its powers
* :mod:`specres.vandermonde` -- Vandermonde conditioning, bounds and the ill-conditioned construction
* :mod:`specres.linalg` -- thin dense linear-algebra layer
* :mod:`specres.mpm` -- modified matrix pencil recovery
* :mod:`specres.refine` -- Fejer-preconditioned iterative refinement
"""

__version__ = "0.1.0"

from .errors import SpecresError  # noqa: E402
from .signal import (MeasurementSet, Signal, Spike, matching_distance, measure, min_separation,  # noqa: E402
                     wrap_distance)

__all__ = ["MeasurementSet", "Signal", "Spike", "SpecresError", "matching_distance", "measure",
           "min_separation", "wrap_distance", "__version__"]
