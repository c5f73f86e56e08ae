"""Decay rates and imaginary Green tensors near a perfectly conducting wedge.

Two convergent series expansions (cylindrical for the edge-parallel source,
spherical vector waves for the rest) give Im G everywhere in the vacuum
sector, from which normalized spontaneous and cooperative decay rates and a
ring-mask microscopy spot model are built.
"""

from .geometry import (
    InVacuum,
    PointCart,
    PointCyl,
    PointSph,
    WedgeGeometry,
    convert,
    in_vacuum,
    make_wedge,
    to_cartesian,
    to_cylindrical,
    to_spherical,
)
from .oracles import HalfSpaceFrame, free_space_ldos, halfspace_rate, im_g_free, im_g_halfspace
from .parallel import ImHertzZ, Truncation, ZZResult, im_p_zz, im_pi_z, suggest_truncation_parallel
from .perpendicular import (
    ImGreenTensor,
    VectorWaveTerm,
    im_g_full,
    im_s_tensor,
    suggest_truncation_spherical,
    vector_waves,
    z_norm,
)
from .rates import Dipole, RateResult, cooperative_rate, decay_rate, field_of_unit_current
from .sted import (
    SpotResult,
    StedParams,
    beam_profile,
    default_ring_gamma_map,
    detection_probability,
    spot_size,
    spot_size_table,
)

__version__ = "0.1.0"

__all__ = [
    "WedgeGeometry",
    "PointCart",
    "PointCyl",
    "PointSph",
    "InVacuum",
    "make_wedge",
    "convert",
    "to_cartesian",
    "to_cylindrical",
    "to_spherical",
    "in_vacuum",
    "Truncation",
    "ImHertzZ",
    "ZZResult",
    "im_pi_z",
    "im_p_zz",
    "suggest_truncation_parallel",
    "suggest_truncation_spherical",
    "ImGreenTensor",
    "VectorWaveTerm",
    "z_norm",
    "vector_waves",
    "im_s_tensor",
    "im_g_full",
    "Dipole",
    "RateResult",
    "decay_rate",
    "cooperative_rate",
    "field_of_unit_current",
    "HalfSpaceFrame",
    "im_g_free",
    "im_g_halfspace",
    "halfspace_rate",
    "free_space_ldos",
    "StedParams",
    "SpotResult",
    "beam_profile",
    "detection_probability",
    "spot_size",
    "spot_size_table",
    "default_ring_gamma_map",
    "__version__",
]
