"""Numerical toolkit for transports along discretized paths in vector bundles."""

from .errors import (
    BadInvolution,
    BundleError,
    DegenerateMetric,
    DimensionMismatch,
    GridMismatch,
    GroupoidViolation,
    InvalidConjugatorPair,
    MissingEntity,
    NonFiniteEntry,
    NotConsistent,
    NotSymmetric,
    SchemaError,
    ShapeMismatch,
    SignatureVaries,
    SingularFactor,
    SingularFibreMap,
    UnknownCheck,
)
from .grids import FiberSpec, PathGrid
from .transport import (
    FrameFactor,
    GaugeMap,
    GeneralTransport,
    GroupoidReport,
    LinearTransport,
    apply_gauge,
    as_general,
    factor_from_transport,
    transport_matrix,
    verify_groupoid,
)
from .morphism import (
    BaseMap,
    ConjugatorC,
    ConsistencyReport,
    PathMorphism,
    check_consistency,
    check_section_transported,
    derive_conjugator,
    induced_transport_apply,
    invert_to_transport,
    synthesize_consistent,
    transport_conjugator,
)
from .structures import (
    AlmostComplexField,
    BilinearField,
    FinslerSampler,
    SectionField,
    StructureReport,
    check_ac_consistency,
    check_additivity,
    check_almost_complex,
    check_bilinear_consistency,
    check_finsler_consistency,
    check_homogeneity,
    check_section_addition,
)
from .hermitian import (
    ConjugatorPair,
    HermitianSolveResult,
    HermitianStructure,
    Infeasible,
    PMatrix,
    Signature,
    SignatureReport,
    check_signature_constancy,
    hermitian_from_transport,
    signature_normalize,
    solve_P,
    solve_Z_system,
    solve_hermitian,
    transport_from_hermitian,
    validate_conjugator_pair,
)
from .document import BundleDocument, parse_document, serialize_document
from .runner import Verdict, run_check, synthesize
from .fuzzing import FuzzReport, fuzz

__version__ = "0.1.0"
