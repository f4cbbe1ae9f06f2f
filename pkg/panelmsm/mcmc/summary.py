import math
from typing import NamedTuple, Sequence

import numpy as np
import pandas as pd

from panelmsm.exceptions import ChainError
from panelmsm.mcmc.sampler import PosteriorChain
from panelmsm.utils import atomic_write

MIN_DRAWS = 100


class ParameterSummary(NamedTuple):
    name: str
    mean: float
    sd: float
    hpd_low: float
    hpd_high: float
    level: float
    rhat: float | None = None

    def contains(self, value: float) -> bool:
        return self.hpd_low <= value <= self.hpd_high


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise ChainError(f"Credible level must be in (0, 1), got {level}")


def hpd(draws: np.ndarray, level: float = 0.95) -> tuple[float, float]:
    """Shortest interval holding `level` of the sorted draws."""
    _check_level(level)
    x = np.sort(np.asarray(draws, dtype=float).reshape(-1))
    n = x.shape[0]
    if n < MIN_DRAWS:
        raise ChainError(f"HPD intervals need at least {MIN_DRAWS} draws, got {n}")
    k = min(n, int(math.ceil(level * n)))
    widths = x[k - 1 :] - x[: n - k + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k - 1])


def split_rhat(chains: Sequence[np.ndarray]) -> float:
    """Potential scale reduction with every chain split in halves."""
    halves = []
    for draws in chains:
        draws = np.asarray(draws, dtype=float).reshape(-1)
        half = draws.shape[0] // 2
        halves.extend([draws[:half], draws[half : 2 * half]])
    n = min(h.shape[0] for h in halves)
    if n < 2:
        return math.nan
    stacked = np.stack([h[:n] for h in halves])
    within = stacked.var(axis=1, ddof=1).mean()
    between = n * stacked.mean(axis=1).var(ddof=1)
    if within == 0:
        return 1.0 if between == 0 else math.inf
    var_plus = (n - 1) / n * within + between / n
    return float(math.sqrt(var_plus / within))


def summarize(
    chains: PosteriorChain | Sequence[PosteriorChain],
    level: float = 0.95,
) -> list[ParameterSummary]:
    """Posterior mean, SD and HPD interval of every parameter.

    Retained draws of all chains are pooled; split-R-hat is added when
    there are at least two chains.
    """
    _check_level(level)
    if isinstance(chains, PosteriorChain):
        chains = [chains]
    if not chains:
        raise ChainError("No chains to summarize")
    names = chains[0].names
    pooled = np.concatenate([chain.retained for chain in chains])
    result = []
    for j, name in enumerate(names):
        draws = pooled[:, j]
        low, high = hpd(draws, level)
        rhat = None
        if len(chains) > 1:
            rhat = split_rhat([chain.retained[:, j] for chain in chains])
        result.append(
            ParameterSummary(
                name=name,
                mean=float(draws.mean()),
                sd=float(draws.std(ddof=1)),
                hpd_low=low,
                hpd_high=high,
                level=level,
                rhat=rhat,
            )
        )
    return result


#
# CSV output
#


def chain_frame(chain: PosteriorChain) -> pd.DataFrame:
    """Retained iterations with 1-based iteration numbers."""
    df = pd.DataFrame(chain.retained, columns=list(chain.names))
    df.insert(0, "iteration", np.arange(chain.n_burnin + 1, chain.n_iter + 1))
    df["log_post"] = chain.log_post[chain.n_burnin :]
    df["accepted"] = chain.accepted[chain.n_burnin :].astype(int)
    return df


def write_chain_csv(chain: PosteriorChain, path: str) -> None:
    df = chain_frame(chain)
    atomic_write(path, df.to_csv(index=False, lineterminator="\n"))


def write_summary_csv(summaries: list[ParameterSummary], path: str) -> None:
    columns = ["parameter", "mean", "sd", "hpd_low", "hpd_high", "level"]
    with_rhat = any(s.rhat is not None for s in summaries)
    if with_rhat:
        columns.append("rhat")
    rows = [
        [s.name, s.mean, s.sd, s.hpd_low, s.hpd_high, s.level]
        + ([s.rhat] if with_rhat else [])
        for s in summaries
    ]
    df = pd.DataFrame(rows, columns=columns)
    atomic_write(path, df.to_csv(index=False, lineterminator="\n"))


def read_summary_csv(path: str) -> list[ParameterSummary]:
    df = pd.read_csv(path)
    has_rhat = "rhat" in df.columns
    return [
        ParameterSummary(
            name=str(row["parameter"]),
            mean=float(row["mean"]),
            sd=float(row["sd"]),
            hpd_low=float(row["hpd_low"]),
            hpd_high=float(row["hpd_high"]),
            level=float(row["level"]),
            rhat=float(row["rhat"]) if has_rhat else None,
        )
        for _, row in df.iterrows()
    ]
