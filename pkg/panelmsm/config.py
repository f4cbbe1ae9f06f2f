"""Engine configuration object"""

import os

import psutil
from pydantic import BaseModel, Field


def default_worker_count() -> int:
    return psutil.cpu_count(logical=False) or os.cpu_count() or 1


class PanelMSMConfig(BaseModel):
    """Engine configuration"""

    workers: int = Field(
        default_factory=default_worker_count,
        description="Number of worker processes used for subject-level "
        "parallelism. Defaults to the number of physical cores.",
    )

    ode_rtol: float = Field(
        default=1e-8,
        description="Relative tolerance of the adaptive Runge-Kutta integrator",
    )

    ode_atol: float = Field(
        default=1e-10,
        description="Absolute tolerance of the adaptive Runge-Kutta integrator",
    )

    ode_max_steps: int = Field(
        default=100_000,
        description="Maximum number of integrator steps per interval",
    )

    stochastic_tol: float = Field(
        default=1e-8,
        description="Largest deviation from a stochastic matrix that is "
        "silently repaired by the cleanup step",
    )

    prior_scale: float = Field(
        default=20.0,
        description="Default Gaussian prior scale on every unconstrained coordinate",
    )

    log_file: str | None = Field(
        default=None,
        description="Path to the log file",
    )

    log_user: str = Field(
        default="panelmsm",
        description="User tag attached to log messages",
    )


#
# Load configuration from environment variables
#


def load_config() -> PanelMSMConfig:
    """Load configuration"""
    prefix = "panelmsm_"
    env_data = {}
    for key, value in dict(os.environ).items():
        if not key.lower().startswith(prefix):
            continue

        key = key.lower().removeprefix(prefix)
        if key in PanelMSMConfig.__fields__:
            env_data[key] = value

    return PanelMSMConfig(**env_data)


msmconfig = load_config()
