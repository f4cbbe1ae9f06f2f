__all__ = [
    "ObservationScheme",
    "PathSimulator",
    "SamplePath",
    "SimConfig",
    "Study",
    "load_sim_config",
    "observe_path",
    "simulate_path",
    "simulate_study",
    "write_study",
]

from panelmsm.simulation.config import ObservationScheme, SimConfig, load_sim_config
from panelmsm.simulation.observe import observe_path
from panelmsm.simulation.paths import PathSimulator, SamplePath, simulate_path
from panelmsm.simulation.study import Study, simulate_study, write_study
