"""Adaptive random-walk Metropolis-Hastings.

Proposals are Gaussian around the current point. During burn-in the
proposal covariance is replaced every `adapt_window` iterations by

    (2.38^2 / p) * (empirical covariance of the chain so far + 1e-6 I)

After burn-in the proposal is frozen, so the retained draws come from a
time-homogeneous Markov chain.
"""

import math
import time
from typing import Callable, NamedTuple

import numpy as np
from nxtools import logging

from panelmsm.exceptions import ChainError, NumericalFailure
from panelmsm.lib.pool import WorkerPool
from panelmsm.likelihood.parallel import loglik_parallel
from panelmsm.mcmc.config import ChainConfig
from panelmsm.model.dataset import PanelDataset
from panelmsm.model.spec import ModelSpec
from panelmsm.transitions.engine import EngineSelector
from panelmsm.utils import make_rng

ADAPT_SCALE = 2.38**2
ADAPT_EPSILON = 1e-6
MAX_FAILURE_SHARE = 0.5

LogTarget = Callable[[np.ndarray], float]


class PosteriorChain(NamedTuple):
    """Every iteration of one chain, burn-in included.

    `proposal_log_post` and `log_u` record each proposal's log target
    and the log uniform draw that decided it, so the acceptance rule can
    be audited.
    """

    names: tuple[str, ...]
    samples: np.ndarray  # (n_iter, p)
    log_post: np.ndarray
    accepted: np.ndarray
    proposal_log_post: np.ndarray
    log_u: np.ndarray
    proposal_cov_history: list[tuple[int, np.ndarray]]
    n_burnin: int
    failures: int
    elapsed: float

    @property
    def n_iter(self) -> int:
        return self.samples.shape[0]

    @property
    def retained(self) -> np.ndarray:
        return self.samples[self.n_burnin :]

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted[self.n_burnin :]))


def _evaluate(log_target: LogTarget, theta: np.ndarray) -> tuple[float, bool]:
    """Log target with numerical failures and unbounded values mapped to -inf.

    The flag is True when the evaluation failed numerically.
    """
    try:
        value = float(log_target(theta))
    except NumericalFailure as e:
        logging.debug(f"Rejected proposal: {e.detail}")
        return -math.inf, True
    if math.isnan(value) or value == math.inf:
        return -math.inf, True
    return value, False


def run_sampler(
    log_target: LogTarget,
    theta0: np.ndarray,
    config: ChainConfig,
    names: tuple[str, ...] | None = None,
    chain: int = 0,
) -> PosteriorChain:
    """Sample from an arbitrary log density with adaptive random-walk MH."""
    theta0 = np.asarray(theta0, dtype=float).copy()
    p = theta0.shape[0]
    names = names or tuple(f"theta.{i + 1}" for i in range(p))
    if len(names) != p:
        raise ChainError(f"Got {len(names)} names for {p} parameters")

    current_lp, failed = _evaluate(log_target, theta0)
    if not math.isfinite(current_lp):
        raise ChainError(
            "Initial log posterior is not finite"
            + (" (numerical failure)" if failed else f" ({current_lp})")
        )

    rng = make_rng(config.seed, chain)
    n_iter = config.n_iter
    window = config.adapt_window
    scale = ADAPT_SCALE / p

    cov = np.eye(p) * config.proposal_scale**2
    chol = np.linalg.cholesky(cov)
    history: list[tuple[int, np.ndarray]] = [(0, cov.copy())]

    samples = np.empty((n_iter, p))
    log_post = np.empty(n_iter)
    accepted = np.zeros(n_iter, dtype=bool)
    proposal_log_post = np.empty(n_iter)
    log_u = np.empty(n_iter)

    current = theta0
    failures = 0
    window_failures = 0
    progress_step = max(1, n_iter // 10)
    start_time = time.perf_counter()

    for i in range(n_iter):
        proposal = current + chol @ rng.standard_normal(p)
        lp, failed = _evaluate(log_target, proposal)
        u = math.log(rng.random() or np.finfo(float).tiny)
        if failed:
            failures += 1
            window_failures += 1
        if u < lp - current_lp:
            current = proposal
            current_lp = lp
            accepted[i] = True
        samples[i] = current
        log_post[i] = current_lp
        proposal_log_post[i] = lp
        log_u[i] = u

        if (i + 1) % window == 0:
            if window_failures > MAX_FAILURE_SHARE * window:
                raise ChainError(
                    f"{window_failures} of {window} proposals failed numerically "
                    f"before iteration {i + 1}"
                )
            window_failures = 0
            if i + 1 <= config.n_burnin:
                if accepted[: i + 1].any():
                    empirical = np.atleast_2d(np.cov(samples[: i + 1].T))
                    cov = scale * (empirical + ADAPT_EPSILON * np.eye(p))
                    chol = np.linalg.cholesky(cov)
                    history.append((i + 1, cov.copy()))
                    rate = float(np.mean(accepted[i + 1 - window : i + 1]))
                    logging.info(
                        f"Chain {chain}: adapted proposal at iteration {i + 1}, "
                        f"window acceptance {rate:.3f}"
                    )
                else:
                    logging.warning(
                        f"Chain {chain}: no accepted moves by iteration {i + 1}, "
                        "keeping the proposal"
                    )

        if i + 1 == config.n_burnin:
            rate = float(np.mean(accepted[: i + 1]))
            logging.info(
                f"Chain {chain}: burn-in acceptance {rate:.3f} "
                f"(target {config.target_acceptance})"
            )
        if (i + 1) % progress_step == 0:
            logging.info(f"Chain {chain}: {100 * (i + 1) // n_iter}% done")

    elapsed = time.perf_counter() - start_time
    return PosteriorChain(
        names=names,
        samples=samples,
        log_post=log_post,
        accepted=accepted,
        proposal_log_post=proposal_log_post,
        log_u=log_u,
        proposal_cov_history=history,
        n_burnin=config.n_burnin,
        failures=failures,
        elapsed=elapsed,
    )


#
# Posterior of a panel model
#


class LogPosterior:
    """log prior + log-likelihood of a model on one dataset."""

    def __init__(
        self,
        spec: ModelSpec,
        data: PanelDataset,
        engine: EngineSelector,
        pool: WorkerPool | None = None,
    ) -> None:
        self.spec = spec
        self.data = data
        self.engine = engine
        self.pool = pool

    def components(self, theta: np.ndarray) -> tuple[float, float]:
        prior = self.spec.log_prior(theta)
        if not math.isfinite(prior):
            return prior, -math.inf
        result = loglik_parallel(
            self.spec, theta, self.data, self.engine, pool=self.pool
        )
        return prior, result.total

    def __call__(self, theta: np.ndarray) -> float:
        prior, loglik = self.components(theta)
        return prior + loglik

    def check_initial(self, theta: np.ndarray) -> None:
        """Raise a ChainError naming the component that makes theta impossible."""
        prior = self.spec.log_prior(theta)
        if not math.isfinite(prior):
            raise ChainError(f"Initial log prior is {prior}")
        try:
            result = loglik_parallel(
                self.spec, theta, self.data, self.engine, pool=self.pool
            )
        except NumericalFailure as e:
            raise ChainError(
                f"Initial likelihood evaluation failed: {e.detail}"
            ) from None
        if result.is_impossible:
            ids = ", ".join(str(i) for i in result.impossible[:10])
            raise ChainError(
                f"Initial likelihood is zero for {len(result.impossible)} "
                f"subjects ({ids})"
            )
        if not math.isfinite(result.total):
            raise ChainError(f"Initial log-likelihood is {result.total}")


def initial_theta(spec: ModelSpec, config: ChainConfig) -> np.ndarray:
    theta = spec.prior.loc.copy()
    for name, value in config.initial.items():
        theta[spec.layout.index(name)] = float(value)
    return theta


def run_chain(
    spec: ModelSpec,
    data: PanelDataset,
    config: ChainConfig,
    workers: int | None = None,
    chain: int = 0,
) -> PosteriorChain:
    """Sample the posterior of `spec` given `data`."""
    engine = config.engine_selector
    theta0 = initial_theta(spec, config)
    with WorkerPool(workers) as pool:
        target = LogPosterior(spec, data, engine, pool)
        target.check_initial(theta0)
        logging.info(
            f"Chain {chain}: {config.n_iter} iterations ({config.n_burnin} burn-in), "
            f"{spec.p} parameters, engine {engine.label}, {pool.workers} workers"
        )
        result = run_sampler(target, theta0, config, spec.parameter_names, chain)
    logging.goodnews(
        f"Chain {chain} finished in {result.elapsed:.1f}s, "
        f"acceptance {result.acceptance_rate:.3f}, {result.failures} failures"
    )
    return result


def run_chains(
    spec: ModelSpec,
    data: PanelDataset,
    config: ChainConfig,
    workers: int | None = None,
) -> list[PosteriorChain]:
    """Run `config.chains` independent chains.

    A single chain spends the workers on the likelihood; several chains
    run side by side with one worker each.
    """
    if config.chains == 1:
        return [run_chain(spec, data, config, workers)]
    indices = list(range(config.chains))
    n = len(indices)
    with WorkerPool(min(workers or n, n)) as pool:
        return pool.map(
            run_chain, [spec] * n, [data] * n, [config] * n, [1] * n, indices
        )
