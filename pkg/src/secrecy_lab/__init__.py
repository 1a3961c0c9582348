"""Distortion-based secrecy for joint source-channel coding over wiretap channels.

Modules:
    infotheory  finite-alphabet pmfs, channels, joints, entropies, TV distance
    regions     exact (D_b, D_e) evaluation of Schemes O, I, II and the outer bound
    optimize    grid plus refinement search over auxiliary distributions
    simulate    finite-blocklength hybrid coding and soft-covering checks
    cli         the ``secrecy-lab`` command
"""

__version__ = "0.1.0"

from .infotheory import (  # noqa: E402
    Channel,
    DistortionMeasure,
    JointDist,
    Pmf,
    build_joint,
    conditional_mutual_information,
    entropy,
    mutual_information,
    tv_distance,
)
from .regions import (  # noqa: E402
    RegionPoint,
    SchemeIISpec,
    SchemeISpec,
    SchemeOSpec,
    embed_o_in_ii,
    eval_scheme_i,
    eval_scheme_ii,
    eval_scheme_o,
    perfect_secrecy_bound,
)

__all__ = [
    "__version__",
    "Pmf",
    "Channel",
    "DistortionMeasure",
    "JointDist",
    "build_joint",
    "entropy",
    "mutual_information",
    "conditional_mutual_information",
    "tv_distance",
    "RegionPoint",
    "SchemeISpec",
    "SchemeOSpec",
    "SchemeIISpec",
    "eval_scheme_i",
    "eval_scheme_o",
    "eval_scheme_ii",
    "embed_o_in_ii",
    "perfect_secrecy_bound",
]
