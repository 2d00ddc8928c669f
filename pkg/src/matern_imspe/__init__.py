"""Closed-form integrals of half-integer Matérn kernels over [-1, 1] and IMSPE assembly.

The order ``p`` selects the kernel with smoothness ``nu = p + 1/2``; ``theta``
is the inverse squared length-scale.
"""

__version__ = "0.1.0"

from .coefficients import (
    CoefficientSet,
    ConjectureCheck,
    MaternOrder,
    VerificationReport,
    bessel_numbers,
    bessel_row,
    check_bessel_conjecture,
    coefficient_table_csv,
    coefficient_table_json,
    double_factorial,
    get_p_max,
    make_coefficients,
    verify_companion_binomial_identity,
    verify_double_factorial_identity,
    verify_fubini_identity,
)
from .errors import (
    DesignParseError,
    DimensionMismatchError,
    DomainError,
    MaternImspeError,
    OrderOutOfRangeError,
    SingularDesignError,
)
from .imspe import Design, ImspeMatrices, assemble, load_design
from .kernel import correlation_matrix, matern_correlation
from .oracle import MonteCarloEstimate, QuadratureSpec, kink_spec, mc_imspe, quad_product, quad_single
from .product_integral import (
    ConsolidatedCoefficients,
    evaluate_product,
    product_integral,
    product_integral_consolidated_coeffs,
    product_integral_matrix,
)
from .result import IntegralResult
from .single_integral import evaluate_single, single_integral, single_integral_vector
