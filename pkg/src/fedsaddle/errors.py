"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment configuration or hyperparameters (CLI exit code 2)."""

    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class NumericalAbort(RuntimeError):
    """A client iterate became NaN/Inf; runs abort rather than clamp (exit code 3)."""

    def __init__(self, client_id, iteration, detail=""):
        msg = f"non-finite iterate on client {client_id} at iteration {iteration}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.client_id = client_id
        self.iteration = iteration


class RunAbort(RuntimeError):
    """A per-client step closure raised; carries the offending client id."""

    def __init__(self, client_id, cause):
        super().__init__(f"client {client_id} step failed: {cause!r}")
        self.client_id = client_id
        self.cause = cause


class SolverDiagnosticError(RuntimeError):
    """An iterative metric solver hit its iteration cap; carries the last residual."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual
