"""Monte Carlo volume estimation for convex polytopes.

Bodies can be given by halfspaces, vertices, or zonotope generators; the
estimator telescopes the volume through an annealed schedule of scaled
template bodies sampled with Hit-and-Run.  A PCA order-reduction scorer
for zonotopes rides on top of the estimator.
"""

from .annealing import CoolingParams, ScheduleResult, anneal, anneal_hbody
from .bodies import (
    Ball,
    HPolytope,
    ShiftedHBody,
    VPolytope,
    Zonotope,
    chebyshev_center,
    enclosing_ellipsoid,
    round_vpolytope,
    zonotope_to_hbody,
)
from .errors import (
    LpFailure,
    NumericError,
    ParseError,
    PolyvolError,
    ScheduleFailure,
)
from .estimate import (
    VolumeConfig,
    VolumeReport,
    ball_volume_log,
    estimate_ratio,
    split_error,
    volume,
)
from .formats import (
    read_ext,
    read_ine,
    read_zonotope,
    write_ext,
    write_ine,
    write_zonotope,
)
from .reduction import FitnessResult, fitness, interval_hull, pca_reduce
from .sampling import HnRChain, WalkConfig, rng_stream

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "CoolingParams",
    "FitnessResult",
    "HPolytope",
    "HnRChain",
    "LpFailure",
    "NumericError",
    "ParseError",
    "PolyvolError",
    "ScheduleFailure",
    "ScheduleResult",
    "ShiftedHBody",
    "VPolytope",
    "VolumeConfig",
    "VolumeReport",
    "WalkConfig",
    "Zonotope",
    "anneal",
    "anneal_hbody",
    "ball_volume_log",
    "chebyshev_center",
    "enclosing_ellipsoid",
    "estimate_ratio",
    "fitness",
    "interval_hull",
    "pca_reduce",
    "read_ext",
    "read_ine",
    "read_zonotope",
    "rng_stream",
    "round_vpolytope",
    "split_error",
    "volume",
    "write_ext",
    "write_ine",
    "write_zonotope",
    "zonotope_to_hbody",
]
