"""Log-linear transition rate model.

Every allowed transition j has its own design (a subset of intercept,
time and subject covariates) and rate

    q_j(t, x) = exp(beta_j . design_j(t, x))

Rates are evaluated in batches: `RateFunction.__call__` takes N times
and an (N, c) covariate matrix and returns N generators at once.
"""

import re
from typing import NamedTuple

import numpy as np
from pydantic import Field, validator

from panelmsm.exceptions import DimensionMismatchError, RejectedEvaluation
from panelmsm.types import COVARIATE_REGEX, RESERVED_TERMS, PMModel, transition_name

# exp() beyond 1e300 is treated as overflow
LOG_RATE_MAX = float(np.log(1e300))


class RateSpec(PMModel):
    """Allowed transitions and their per-transition covariate designs."""

    mask: list[list[bool]] = Field(
        ...,
        title="Transition mask",
        description="m x m matrix of allowed off-diagonal transitions",
    )
    terms: list[list[str]] = Field(
        ...,
        title="Design terms",
        description="Design of every allowed transition in row-major mask order",
        example=[["intercept", "time", "sex"]],
    )

    @validator("mask")
    def validate_mask(cls, value: list[list[bool]]) -> list[list[bool]]:
        m = len(value)
        for r, row in enumerate(value):
            if len(row) != m:
                raise ValueError("Transition mask must be square")
            if row[r]:
                raise ValueError(
                    f"Transition mask diagonal must be false (row {r + 1})"
                )
        return value

    @validator("terms")
    def validate_terms(cls, value: list[list[str]], values) -> list[list[str]]:
        mask = values.get("mask")
        if mask is None:
            return value
        n_allowed = sum(sum(1 for cell in row if cell) for row in mask)
        if len(value) != n_allowed:
            raise ValueError(
                f"Expected designs for {n_allowed} transitions, got {len(value)}"
            )
        for design in value:
            if "intercept" not in design:
                raise ValueError("Every allowed transition needs an intercept term")
            if len(set(design)) != len(design):
                raise ValueError(f"Duplicate terms in design {design}")
            for term in design:
                if term in RESERVED_TERMS:
                    continue
                if not _is_covariate_name(term):
                    raise ValueError(f"Invalid design term '{term}'")
        return value

    @property
    def m(self) -> int:
        return len(self.mask)

    @property
    def transitions(self) -> list[tuple[int, int]]:
        """0-based (source, target) pairs in row-major order."""
        return [
            (r, s)
            for r, row in enumerate(self.mask)
            for s, allowed in enumerate(row)
            if allowed
        ]

    @property
    def transition_names(self) -> list[str]:
        return [transition_name(r, s) for r, s in self.transitions]

    @property
    def covariates(self) -> list[str]:
        """Covariate names used by any design, in first-use order."""
        result: list[str] = []
        for design in self.terms:
            for term in design:
                if term not in RESERVED_TERMS and term not in result:
                    result.append(term)
        return result

    @property
    def n_coefficients(self) -> int:
        return sum(len(design) for design in self.terms)

    @property
    def coefficient_names(self) -> list[str]:
        return [
            f"beta.{name}.{term}"
            for name, design in zip(self.transition_names, self.terms)
            for term in design
        ]

    def mask_array(self) -> np.ndarray:
        return np.array(self.mask, dtype=bool)

    def compile(self, coefficients: np.ndarray) -> "RateFunction":
        return RateFunction.from_spec(self, coefficients)


def _is_covariate_name(term: str) -> bool:
    return re.match(COVARIATE_REGEX, term) is not None


class RateFunction(NamedTuple):
    """Rate model with coefficients bound, ready for batched evaluation.

    log q_j(t, x) = alpha_j + tau_j * t + gamma_j . x
    """

    m: int
    source: np.ndarray  # (J,)
    target: np.ndarray  # (J,)
    alpha: np.ndarray  # (J,)
    tau: np.ndarray  # (J,)
    gamma: np.ndarray  # (J, c)
    covariates: tuple[str, ...]

    @classmethod
    def from_spec(cls, spec: RateSpec, coefficients: np.ndarray) -> "RateFunction":
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (spec.n_coefficients,):
            raise DimensionMismatchError(
                f"Expected {spec.n_coefficients} rate coefficients, "
                f"got {coefficients.shape}"
            )
        covariates = spec.covariates
        n = len(spec.terms)
        alpha = np.zeros(n)
        tau = np.zeros(n)
        gamma = np.zeros((n, len(covariates)))
        offset = 0
        for j, design in enumerate(spec.terms):
            for term in design:
                value = coefficients[offset]
                offset += 1
                if term == "intercept":
                    alpha[j] = value
                elif term == "time":
                    tau[j] = value
                else:
                    gamma[j, covariates.index(term)] = value
        pairs = spec.transitions
        return cls(
            m=spec.m,
            source=np.array([r for r, _ in pairs], dtype=int),
            target=np.array([s for _, s in pairs], dtype=int),
            alpha=alpha,
            tau=tau,
            gamma=gamma,
            covariates=tuple(covariates),
        )

    @property
    def is_time_constant(self) -> bool:
        return not np.any(self.tau)

    def covariate_vector(self, covs: dict[str, float] | np.ndarray) -> np.ndarray:
        """Order a covariate mapping the way the design expects it."""
        if isinstance(covs, dict):
            try:
                return np.array([float(covs[name]) for name in self.covariates])
            except KeyError as e:
                raise DimensionMismatchError(f"Missing covariate {e}") from None
        vector = np.asarray(covs, dtype=float).reshape(-1)
        if vector.shape != (len(self.covariates),):
            raise DimensionMismatchError(
                f"Expected {len(self.covariates)} covariates, got {vector.shape}"
            )
        return vector

    def log_rates(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Linear predictors, shape (N, J)."""
        t = np.asarray(t, dtype=float).reshape(-1)
        eta = self.alpha[None, :] + t[:, None] * self.tau[None, :]
        if self.gamma.shape[1]:
            eta = eta + np.einsum("nc,jc->nj", np.atleast_2d(X), self.gamma)
        bad = ~(eta <= LOG_RATE_MAX)
        if np.any(bad):
            j = int(np.nonzero(bad.any(axis=0))[0][0])
            raise RejectedEvaluation(
                f"Rate of transition "
                f"{transition_name(self.source[j], self.target[j])} overflows",
                transition=j,
            )
        return eta

    def rates(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        return np.exp(self.log_rates(t, X))

    def __call__(self, t: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Generators Q(t_n, x_n), shape (N, m, m)."""
        q = self.rates(t, X)
        Q = np.zeros((q.shape[0], self.m, self.m))
        Q[:, self.source, self.target] = q
        diagonal = np.arange(self.m)
        Q[:, diagonal, diagonal] = -Q.sum(axis=2)
        return Q

    def exit_rates(self, t: np.ndarray, x: np.ndarray, state: int) -> np.ndarray:
        """Rates out of `state` at times t for one covariate vector, shape (N, J_r)."""
        t = np.asarray(t, dtype=float).reshape(-1)
        select = self.source == state
        X = np.broadcast_to(x, (t.shape[0], x.shape[0]))
        return self.rates(t, X)[:, select]


def build_rate_matrix(
    spec: RateSpec,
    coefficients: np.ndarray,
    t: float,
    covs: dict[str, float] | np.ndarray,
) -> np.ndarray:
    """Generator Q(t) for one subject's covariates."""
    if not np.isfinite(t):
        raise DimensionMismatchError(f"Time must be finite, got {t}")
    rate_function = spec.compile(coefficients)
    x = rate_function.covariate_vector(covs)
    return rate_function(np.array([t]), x[None, :])[0]
