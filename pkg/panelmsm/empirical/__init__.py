__all__ = [
    "CountingProcessData",
    "CumulativeHazard",
    "RateEstimate",
    "StratumEvents",
    "TransitionEstimate",
    "aalen_johansen",
    "counting_from_paths",
    "cumulative_rate",
    "nelson_aalen",
    "panel_to_counting",
    "recover_rate_coefficients",
    "write_estimates_csv",
    "write_hazards_csv",
    "write_transition_csv",
]

from panelmsm.empirical.aalen_johansen import TransitionEstimate, aalen_johansen
from panelmsm.empirical.counting import (
    CountingProcessData,
    StratumEvents,
    counting_from_paths,
    panel_to_counting,
)
from panelmsm.empirical.nelson_aalen import CumulativeHazard, nelson_aalen
from panelmsm.empirical.output import (
    write_estimates_csv,
    write_hazards_csv,
    write_transition_csv,
)
from panelmsm.empirical.recovery import (
    RateEstimate,
    cumulative_rate,
    recover_rate_coefficients,
)
