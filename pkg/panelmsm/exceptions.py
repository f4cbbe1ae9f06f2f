from typing import Any

from nxtools import logging


class PanelMSMException(Exception):
    """Base class for all panelmsm exceptions.

    `status` doubles as the process exit code when the exception
    reaches the command line.
    """

    detail: str = "Error"
    status: int = 1
    extra: dict[str, Any]

    def __init__(
        self,
        detail: str | None = None,
        log: bool | str = False,
        **kwargs,
    ) -> None:
        if detail is not None:
            self.detail = detail
        self.extra = kwargs
        if log is True:
            logging.error(f"EXCEPTION: {self.status} {self.detail}")
        elif isinstance(log, str):
            logging.error(f"EXCEPTION: {self.status} {log}")

        super().__init__(self.detail)


class ConfigurationError(PanelMSMException):
    """Raised when a model or simulation config cannot be parsed or validated."""

    detail: str = "Invalid configuration"
    status: int = 2

    def __init__(
        self,
        detail: str | None = None,
        line: int | None = None,
        path: str | None = None,
        **kwargs,
    ) -> None:
        self.line = line
        self.path = path
        if detail is not None and line is not None:
            where = f"{path}:{line}" if path else f"line {line}"
            detail = f"{where}: {detail}"
        super().__init__(detail, **kwargs)


class DataError(PanelMSMException):
    """Raised when panel data violate the ingestion rules."""

    detail: str = "Invalid data"
    status: int = 2


class DimensionMismatchError(PanelMSMException):
    """Raised when a vector does not match the expected layout."""

    detail: str = "Dimension mismatch"
    status: int = 2


class NumericalFailure(PanelMSMException):
    """Base class of failures inside the transition engine."""

    detail: str = "Numerical failure"
    status: int = 1


class RejectedEvaluation(NumericalFailure):
    """Raised when a rate predictor overflows.

    The sampler treats it as a proposal with zero posterior density.
    """

    detail: str = "Rate predictor overflow"

    def __init__(self, detail: str | None = None, transition: int = -1, **kwargs):
        self.transition = transition
        super().__init__(detail, transition=transition, **kwargs)


class SolverFailure(NumericalFailure):
    """Raised when the adaptive integrator cannot advance."""

    detail: str = "ODE solver failure"

    def __init__(self, detail: str | None = None, time: float = 0.0, **kwargs):
        self.time = time
        super().__init__(detail, time=time, **kwargs)


class IntegrationAccuracyError(NumericalFailure):
    """Raised when a computed transition matrix is not stochastic within tolerance."""

    detail: str = "Transition matrix outside stochastic tolerance"


class DataConsistencyError(PanelMSMException):
    """Raised when counting-process data contradict themselves."""

    detail: str = "Inconsistent event data"
    status: int = 1


class DegenerateDesignError(PanelMSMException):
    """Raised when a regression design has no spread on the grid."""

    detail: str = "Degenerate design"
    status: int = 1


class BiasBoundViolation(PanelMSMException):
    """Raised when a projection bias check fails."""

    detail: str = "Projection bias check failed"
    status: int = 1


class SimulationConfigError(PanelMSMException):
    """Raised when a simulation cannot be set up from its configuration."""

    detail: str = "Invalid simulation configuration"
    status: int = 2


class ChainError(PanelMSMException):
    """Raised when the sampler cannot start or keeps failing."""

    detail: str = "MCMC chain failure"
    status: int = 1
