from .gerschgorin import GerschgorinRegion, gerschgorin_bound
from .power import PowerConfig, EigenEstimate, BoundCheck, power_method, bound_check
