"""Exception hierarchy. Every error carries a stable ``code`` string used in CLI reports."""


class SymkitError(Exception):
    code = "SYMKIT_ERROR"


class ShapeError(SymkitError, ValueError):
    code = "SHAPE_ERROR"


class DimensionCap(SymkitError, ValueError):
    code = "DIMENSION_CAP"


class NotHermitian(SymkitError, ValueError):
    code = "NOT_HERMITIAN"


class NotUnitary(SymkitError, ValueError):
    code = "NOT_UNITARY"


class NotGroup(SymkitError, ValueError):
    code = "NOT_GROUP"


class ProjectivePhase(SymkitError, ValueError):
    code = "PROJECTIVE_PHASE"


class NotInvolution(SymkitError, ValueError):
    code = "NOT_INVOLUTION"


class BadWire(SymkitError, ValueError):
    code = "BAD_WIRE"


class BadIndex(SymkitError, IndexError):
    code = "BAD_INDEX"


class BadCircuit(SymkitError, ValueError):
    code = "BAD_CIRCUIT"


class BadThresholds(SymkitError, ValueError):
    code = "BAD_THRESHOLDS"


class BadParams(SymkitError, ValueError):
    code = "BAD_PARAMS"


class SolverFail(SymkitError, RuntimeError):
    code = "SOLVER_FAIL"


class Infeasible(SymkitError, RuntimeError):
    """Primal SDP infeasible. ``certificate`` holds y with A*(y) >= 0 and b.y < 0."""

    code = "INFEASIBLE"

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class ParseError(SymkitError, ValueError):
    code = "PARSE_ERROR"


class SchemaError(SymkitError, ValueError):
    code = "SCHEMA_ERROR"
