__all__ = [
    "EngineSelector",
    "FactorCache",
    "PiecewiseGrid",
    "TransitionBatch",
    "TransitionSolution",
    "cleanup_stochastic",
    "g_d",
    "solve_homogeneous",
    "solve_ode",
    "solve_piecewise",
    "solve_transition",
    "transition_batch",
]

from panelmsm.transitions.cleanup import cleanup_stochastic
from panelmsm.transitions.engine import (
    EngineSelector,
    solve_transition,
    transition_batch,
)
from panelmsm.transitions.expm import solve_homogeneous
from panelmsm.transitions.grid import PiecewiseGrid, g_d
from panelmsm.transitions.ode import solve_ode
from panelmsm.transitions.piecewise import FactorCache, solve_piecewise
from panelmsm.transitions.solution import TransitionBatch, TransitionSolution
