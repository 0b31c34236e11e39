"""Delta-convex function calculus at desk scale.

Convex sets and gauges, control-function arithmetic for compositions,
products and quotients, the local-to-global gluing recursion, explicit
counterexample constructions, and sampled verification — in dimensions
one to three.
"""

from .calculus import (
    LipschitzCertificate,
    bilinear_product,
    compose,
    compose_global,
    product,
    quadratic_compose,
    quotient,
    special_compose,
)
from .core import (
    DCFunction,
    DCMapping,
    DCPair,
    bundle,
    check_control,
    dc_affine,
    dc_constant,
    dc_max,
    dc_negate,
    dc_scale,
    dc_sum,
    from_convex,
    from_pair,
)
from .errors import DcxError, DomainError, InputError, InternalError, PreconditionError, UndecidableError
from .functions import (
    ConvexFn,
    QuadraticForm,
    c11_dc_split,
    estimate_lipschitz,
    lipschitz_bound_on_inner,
    lipschitz_extension,
    quadratic_dc_split,
)
from .geometry import (
    Ball,
    Box,
    ConvexSet,
    HullBody,
    Interval,
    WholeSpace,
    compactly_contained,
    dist_to_set,
    inner_parallel,
    minkowski_gauge,
    outer_parallel,
)
from .gluing import Exhaustion, LocalControlFamily, build_exhaustion, dc_from_local, glue, sublevel_exhaustion
from .verify import VerificationReport, check_midpoint_convex, check_segment_convex, total_variation

__version__ = "0.1.0"
