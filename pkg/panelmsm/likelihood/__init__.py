__all__ = [
    "EmissionMatrix",
    "LogLikResult",
    "emission_diag",
    "loglik",
    "loglik_parallel",
]

from panelmsm.likelihood.emission import EmissionMatrix, emission_diag
from panelmsm.likelihood.forward import LogLikResult, loglik
from panelmsm.likelihood.parallel import loglik_parallel
