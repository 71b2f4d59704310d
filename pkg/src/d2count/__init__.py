"""Deterministic approximate counting for degree-2 polynomial threshold functions."""
from .boolcount import BooleanParams, RegularityParams, RegularityTree, construct_tree, count_boolean, count_boolean_regular
from .config import Config, load_config, parse_config
from .decouple import DecomposeResult, JuntaParams, approximate_decompose, construct_junta
from .errors import D2CountError, FeasibilityError, PreconditionError
from .fileio import ParseError, format_d2p, parse_d2p, parse_edges, read_d2p, read_edges, write_d2p
from .gausscount import CountParams, count_gaussian, count_junta, dp_count, normal_cover
from .moments import MomentParams, MomentResult, absolute_moment
from .poly import (
    DecoupledPolynomial,
    Degree2Polynomial,
    graph_cut_poly,
    graph_induced_poly,
    influences,
    is_regular,
    restrict,
    variance_boolean,
    variance_gaussian,
)
from .spectral import EigenResult, SpectralParams, approximate_largest_eigen

__version__ = "0.1.0"
