"""tracelab: numerical experiments for hypersurface trace inequalities.

Desk-scale verification of trace estimates on level sets of elliptic
degree-two homogeneous symbols: sharp constants from Gamma ratios and
weighted Bessel suprema, dilation scaling of trace norms, duality with
space-time smoothing estimates, and the wedge-filtered operators that
rescue the critical regularity 1/2.
"""

__version__ = "0.1.0"

from .symbols import (
    HomogeneousSymbol,
    QuadraticSymbol,
    QuarticSymbol,
    PerturbedSphereSymbol,
    make_symbol,
    symbol_from_config,
    check_homogeneity_euler,
    dual_eval,
    dual_symbol,
)
from .special_functions import (
    BesselEvaluator,
    WeightSpec,
    bessel_j,
    bracket_weight,
    log_gamma,
    power_weight,
    weighted_bessel_integral,
)
from .surfaces import SurfaceQuadrature, build_quadrature, coarea_verify, surface_integral
from .constants import (
    ConstantResult,
    c1_trace_constant,
    convert_smoothing_to_trace,
    gamma_closed_form_constant,
    walther_smoothing_constant,
)
from .fields import GridField, RadialProfile, make_test_function, sobolev_norm
from .verify import (
    critical_comparison,
    duality_check,
    rho_scan,
    sharpness_run,
    trace_norm,
    trace_ratio,
)

__all__ = [name for name in dir() if not name.startswith("_")]
