"""Exception hierarchy for bundletk."""


class BundleError(Exception):
    """Base class for all bundletk errors."""


class SingularFactor(BundleError):
    """A frame-factor or gauge matrix fails the invertibility threshold."""


class GroupoidViolation(BundleError):
    """A supplied transport-matrix family breaks composition or identity laws."""


class ShapeMismatch(BundleError):
    """Matrix or vector shapes are inconsistent with the declared fibres."""


class GridMismatch(BundleError):
    """A base map or matrix family does not line up with its path grid."""


class NotConsistent(BundleError):
    """An operation required a consistent morphism/transport pair and got none."""


class SingularFibreMap(BundleError):
    """A fibre map that must be inverted is numerically singular."""


class DegenerateMetric(BundleError):
    """A symmetric form has an eigenvalue too close to zero."""


class NotSymmetric(BundleError):
    """A matrix expected to be symmetric is not."""


class BadInvolution(BundleError):
    """An endomorphism expected to square to minus the identity does not."""


class InvalidConjugatorPair(BundleError):
    """A (C0, C) pair violates one of its defining constraints."""


class SignatureVaries(BundleError):
    """A metric family changes signature between samples."""


class SchemaError(BundleError):
    """A document fails structural validation; message carries the JSON path."""


class DimensionMismatch(SchemaError):
    """A matrix entry in a document has the wrong shape for its fibre."""


class NonFiniteEntry(SchemaError):
    """A document contains a NaN or infinite numeric entry."""


class UnknownCheck(BundleError):
    """The CLI was asked to run a check it does not know."""


class MissingEntity(BundleError):
    """A named entity referenced on the command line is absent from the document."""
