"""Spherical harmonics, rotation averaging and zonal kernel estimates on S^2."""

from .harmonics import (
    BASIS_CONVENTION,
    SphereGrid,
    assoc_table,
    evaluate,
    legendre,
    lp_norm_sphere,
    lp_norms_many,
    real_basis_transform,
    reproduce_check,
    sph_harm_matrix,
    zonal,
)
from .report import SphereTheoremReport, verify_sphere_theorem
from .rotations import (
    HarmonicSpace,
    RotationSet,
    Word,
    build_averaging,
    default_rotation_set,
    enumerate_words,
    euler_zyz,
    exact_axis,
    joint_eigenbasis,
    load_rotation_set,
    rotation_angle,
    separation_stats,
    stabilizer_probe,
    wigner_D,
    wigner_small_d,
)
from .zonal import averaged_kernel_probe, kernel_split_norms, loglog_slope, zonal_pieces

# conventional lower-case alias
wigner_d = wigner_D
