__all__ = [
    "ChainConfig",
    "CoverageResult",
    "LogPosterior",
    "ParameterSummary",
    "PosteriorChain",
    "coverage_study",
    "hpd",
    "load_chain_config",
    "run_chain",
    "run_chains",
    "run_sampler",
    "split_rhat",
    "summarize",
    "write_chain_csv",
    "write_summary_csv",
]

from panelmsm.mcmc.config import ChainConfig, load_chain_config
from panelmsm.mcmc.coverage import CoverageResult, coverage_study
from panelmsm.mcmc.sampler import (
    LogPosterior,
    PosteriorChain,
    run_chain,
    run_chains,
    run_sampler,
)
from panelmsm.mcmc.summary import (
    ParameterSummary,
    hpd,
    split_rhat,
    summarize,
    write_chain_csv,
    write_summary_csv,
)
