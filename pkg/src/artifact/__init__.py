"""Exact computations with loops on surfaces and holonomy functions on moduli spaces."""

from .errors import (
    ArtifactError,
    IllegalSlide,
    JacobiViolation,
    LogdetNotEvaluable,
    MalformedSkeleton,
    NonClosedWord,
    NonComposablePath,
    NonInvertibleBody,
    ParseError,
    ProperPowerUnsupported,
    RetryExhausted,
    SameVertex,
    UnknownEdge,
    UnknownSuite,
)
from .harness import SUITES, Report, SuiteConfig, phi_even, phi_odd, run_suite
from .loops import (
    CyclicWord,
    FormalSum,
    HBasis,
    bv_delta_wedge,
    canonicalize,
    extended_bracket,
    goldman_bracket,
    parse_element,
    parse_word,
    turaev_cobracket,
)
from .surface import Skeleton, builtin, fuse, reverse_edge, slide

__version__ = "0.1.0"
