"""Exception hierarchy.

``ModelError`` subclasses signal violated domain invariants or
preconditions; ``ConfigError`` signals malformed input documents.  The CLI
maps them to exit codes 3 and 2 respectively.
"""


class LabError(Exception):
    pass


class ConfigError(LabError):
    """Input document is malformed or does not match its schema."""


class VerificationError(LabError):
    """A closed form and its independent oracle disagree beyond tolerance."""


class ModelError(LabError, ValueError):
    pass


class ZeroMass(ModelError):
    pass


class NonFinite(ModelError):
    pass


class LengthMismatch(ModelError):
    pass


class ZeroVariance(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class InvalidModel(ModelError):
    """Mental model table violates positivity, independence or normalisation."""


class UndefinedConditional(ModelError):
    pass


class ZeroProbabilityEvidence(ModelError):
    pass


class WrongTrustClass(ModelError):
    pass


class NonPositiveScale(ModelError):
    pass


class DegenerateBelief(ModelError):
    pass


class ChiOutOfRange(ModelError):
    pass


class NoThreshold(ModelError):
    pass


class DegenerateUtility(ModelError):
    pass


class InvalidPersuasionCurve(ModelError):
    pass


class ConfigInvalid(ModelError):
    pass
