"""Solutions of the elliptic EPD equation, their critical points, and the
integrable hierarchies generated by the hodograph method."""

from .errors import *  # noqa: F401,F403
from .spec import (Composite, Delta, FlowLabel, InversePower, Monomial, Sampled,  # noqa: F401
                   load_spec, spec_from_dict, spec_to_dict)
from .epd import Jet2, dual_value, epd_residual, eval_jet, eval_value  # noqa: F401
from .critical import CriticalPoint, clinants, find_critical, trace_level_curve, vary_critical  # noqa: F401
from .report import ResidualReport  # noqa: F401

__version__ = "0.1.0"
