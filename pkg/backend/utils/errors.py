class DGContactError(Exception):
    """Base exception for contact solver errors."""
    pass

class MeshError(DGContactError):
    """Raised when a mesh is invalid or cannot be built."""
    pass

class AssemblyError(DGContactError):
    """Raised when operator or load assembly fails."""
    pass

class InvalidPenaltyError(AssemblyError):
    """Raised when a nonpositive penalty parameter is supplied."""
    pass

class ConstraintError(AssemblyError):
    """Raised when the contact constraint system cannot be built."""
    pass

class SolverError(DGContactError):
    """Raised when the discrete variational inequality cannot be solved."""
    pass

class SingularSystemError(SolverError):
    """Raised when a saddle system is singular."""

    def __init__(self, message: str, active_set=None):
        super().__init__(message)
        self.active_set = [] if active_set is None else list(active_set)


class ActiveSetNotConvergedError(SolverError):
    """Raised when the active set repeats or has not settled within maxiter."""

    def __init__(self, message: str, previous_set=None, last_set=None):
        super().__init__(message)
        self.previous_set = [] if previous_set is None else list(previous_set)
        self.last_set = [] if last_set is None else list(last_set)


class MultiplierConsistencyError(SolverError):
    """Raised when the recovered multiplier violates the residual identity."""
    pass

class ProblemDefinitionError(DGContactError):
    """Raised when a problem lacks data an operation needs."""
    pass

class ConfigError(DGContactError):
    """Raised for malformed study configuration."""
    pass

class ResultsIOError(DGContactError):
    """Raised when results cannot be written or read."""

    def __init__(self, message: str, path=None):
        super().__init__(f"{message} ({path})" if path is not None else message)
        self.path = path
