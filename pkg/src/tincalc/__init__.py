"""Exact inner products, distances and vertical matching of TIN surfaces.

Two piecewise-linear functions over unrelated triangulations of one
rectangle are compared exactly: the naive quadratic overlay integration
serves as the oracle, and the clique-cover plus multipoint-evaluation
pipeline computes the same rationals subquadratically.
"""

from .errors import (
    BadPrime,
    DegenerateInput,
    DegenerateTriangle,
    InsufficientPrimes,
    InvalidParameter,
    InvalidTin,
    NotConvex,
    ParallelLines,
    ParseError,
    TincalcError,
    VerticalEdge,
)
from .geom import (
    EdgeData,
    LinearFunc,
    Scalar,
    Tin,
    TransformRecord,
    build_edge_data,
    generate_tin,
    generate_valid_pair,
    load_tin,
    normalize_pair,
    parse_tin,
    emit_tin,
    plane_from_triangle,
    save_tin,
    validate_pair,
    validate_tin,
)
from .sympoly import (
    MPoly,
    WedgeLines,
    antiderivative_Q,
    integrate_over_convex_polygon,
    wedge_integral_monomial,
    wedge_numerator_P,
)
from .field import Fp, PrimeBasket, crt_combine, crt_reconstruct, rat_to_fp
from .fastpoly import (
    FracSum,
    PrimeField,
    RationalField,
    multipoint_eval,
    multipoint_multivar,
    poly_mul,
    sum_fractions,
)
from .cliques import CliqueFamily, build_clique_cover, verify_clique_cover
from .locate import Location, batch_locate
from .integrate import (
    clip_triangles,
    integrate_product_over_triangle,
    naive_edge_term_sum,
    naive_inner_product,
    vertex_term_sum,
)
from .fastinner import clique_sigma, edge_term_sum_fast, inner_product_fast
from .match import FitResult, best_fit, l2_distance, moments, sqrt_decimal

__version__ = "0.1.0"
