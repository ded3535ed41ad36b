"""Sums of two squares: sieve tables, gap statistics and Bessel-weighted sums.

The package is organized around immutable tables (membership bitset, lattice
representation counts) and pure functions over them.  See the demos directory
for narrative walkthroughs of each capability.
"""

from .bessel_sum import (
    IdentityReport,
    R2_LINEAR_BOUND,
    SumParams,
    bessel_sum_direct,
    bessel_sum_dual,
    cutoff_from_height,
    l2_coupling,
    l2_deviation,
    l2_deviation_weighted,
    theta_circle_average,
    truncation_index,
    weber_integral_check,
)
from .moments import (
    DistanceRecord,
    MeasureReport,
    MomentReport,
    distance_integral,
    distance_log_ratio_max,
    exceptional_measure,
    gap_moment,
    moment_ratio_table,
    record_scan,
)
from .numerics import (
    ConvergenceError,
    QuadratureSpec,
    ThetaParams,
    bessel_i0_scaled,
    bessel_j0,
    bessel_j0_by_integral,
    circle_average,
    gauss_legendre_adaptive,
    theta_direct,
    theta_dual,
)
from .sieve import (
    GapRecord,
    R2Table,
    TwoSquareTable,
    build_r2_table,
    circle_lattice_distance,
    gap_array,
    gaps,
    is_sum_of_two_squares,
    load_or_build,
    load_table,
    nearest_distance,
    nearest_distance_many,
    r2_square_sum,
    record_gaps,
    save_table,
    sieve_two_squares,
    two_square_defect,
)

__version__ = "0.1.0"
