"""Executable machinery for orthogonal mass partitions.

Exact nonvanishing tests for products of linear forms in truncated polynomial
rings over GF(2), closed-form dimension bounds with tightness detection, an
equipartition verification oracle over weighted point measures, and numerical
solvers that find mutually orthogonal equipartitioning hyperplanes at desk
scale.
"""

from .bounds import (
    BoundRecord,
    bounds_table,
    constraint_count,
    orthogonal_bounds,
    partition_bounds,
    peak_exponent,
    stiefel_dim,
    table_to_csv,
)
from .cobordism import (
    CriterionReport,
    GroupElement,
    MarginScan,
    SphereClassSum,
    SphereProductClass,
    UpperBoundCertificate,
    certificate_margin_scan,
    criterion_spheres,
    criterion_stiefel,
    partition_product,
    partition_product_perm_sum,
    smith_apply,
    upper_bound_certificate,
    weight_product,
)
from .f2ring import (
    F2Poly,
    RingSpec,
    contains_monomial,
    free_expand_oracle,
    is_zero,
    linear_form,
    poly_add,
    poly_from_dict,
    poly_mul,
    poly_pow,
    poly_to_dict,
    product_of_forms,
    ring_new,
)
from .masspart import (
    BoundaryPointError,
    EquipartitionReport,
    Hyperplane,
    HyperplaneTuple,
    WeightedPointMeasure,
    cell_masses,
    g_eval,
    load_planes_json,
    load_point_file,
    moment_curve_fixture,
    side,
    subset_constraints,
    verify_equipartition,
)
from .solver import (
    FrameConfig,
    PancakeResult,
    SolveOptions,
    SolveResult,
    bisect_offset,
    frame_param,
    pancake_solve,
    residual,
    solve_orthogonal,
)

__version__ = "0.1.0"
