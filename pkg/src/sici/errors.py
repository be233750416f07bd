"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and, where it makes
sense, a ``path`` locating the offending field in a spec document
(e.g. ``payload.lower_cpt[3]``).
"""


class SiciError(Exception):
    code = "E_SICI"

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class ShapeError(SiciError, ValueError):
    code = "E_SHAPE"


class SpecError(SiciError, ValueError):
    code = "E_SPEC"


class NonSurjectiveError(SpecError):
    code = "E_NON_SURJECTIVE"


class WeightRangeError(SpecError):
    code = "E_WEIGHT_RANGE"


class GateError(SiciError, ValueError):
    code = "E_GATE"


class GateArityError(GateError):
    code = "E_GATE_ARITY"


class GateTypeError(GateError):
    code = "E_GATE_TYPE"


class GateSyntaxError(GateError):
    code = "E_GATE_SYNTAX"


class ArgumentError(SiciError, ValueError):
    code = "E_ARGUMENT"


class CycleError(SiciError, ValueError):
    code = "E_CYCLE"


class AmbientViolationError(SiciError, ValueError):
    code = "E_AMBIENT"


class DocumentError(SiciError, ValueError):
    """Malformed spec document (syntax, unknown variant, missing fields)."""

    code = "E_DOCUMENT"

    def __init__(self, message, path=None, code=None):
        if code is not None:
            self.code = code
        super().__init__(message, path)


class SizeGuardError(SiciError):
    code = "E_SIZE_GUARD"


class SiciWarning(UserWarning):
    pass
