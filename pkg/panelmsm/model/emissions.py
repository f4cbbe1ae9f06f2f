"""State-conditional emission models.

Categorical kinds draw an observed state label from a row of the
misclassification matrix; Dirichlet kinds emit a vector of relative band
powers on the simplex. Both can be combined.
"""

import re

import numpy as np
from pydantic import Field, validator
from scipy.special import gammaln, softmax, xlogy

from panelmsm.exceptions import DimensionMismatchError
from panelmsm.types import LABEL_REGEX, EmissionKind, PMModel, transition_name

SIMPLEX_TOL = 1e-9


class EmissionModel(PMModel):
    """Emission model of the observed response given the latent state."""

    kind: EmissionKind = Field(
        "exact",
        title="Emission kind",
        description="exact, categorical, dirichlet or categorical+dirichlet",
    )
    pattern: list[list[bool]] | None = Field(
        None,
        title="Misclassification pattern",
        description="Allowed (true state, observed label) cells. "
        "Cells outside the pattern are structural zeros.",
        example=[[1, 1, 0, 0], [1, 1, 1, 0], [0, 1, 1, 0], [0, 0, 0, 1]],
    )
    bands: list[str] = Field(
        default_factory=list,
        title="Bands",
        description="Names of the emission vector components (Dirichlet kinds)",
        example=["delta", "theta", "alpha", "beta"],
    )

    @validator("pattern")
    def validate_pattern(cls, value, values):
        if value is None:
            return value
        m = len(value)
        for r, row in enumerate(value):
            if len(row) != m:
                raise ValueError("Misclassification pattern must be square")
            if not row[r]:
                raise ValueError(
                    f"Misclassification pattern must allow the diagonal (row {r + 1})"
                )
        return value

    @validator("bands")
    def validate_bands(cls, value, values):
        kind = values.get("kind")
        if kind in ("dirichlet", "categorical+dirichlet") and len(value) < 2:
            raise ValueError("Dirichlet emissions need at least two bands")
        for band in value:
            if not re.match(LABEL_REGEX, band):
                raise ValueError(f"Invalid band name '{band}'")
        return value

    @property
    def has_categorical(self) -> bool:
        return self.kind in ("categorical", "categorical+dirichlet")

    @property
    def has_dirichlet(self) -> bool:
        return self.kind in ("dirichlet", "categorical+dirichlet")

    def error_cells(self, m: int) -> list[tuple[int, int]]:
        """Free misclassification cells (off-diagonal pattern entries)."""
        if not self.has_categorical:
            return []
        pattern = self.pattern or [[r == s for s in range(m)] for r in range(m)]
        return [
            (r, s)
            for r, row in enumerate(pattern)
            for s, allowed in enumerate(row)
            if allowed and r != s
        ]

    def misclassification_names(self, m: int) -> list[str]:
        return [f"misc.{transition_name(r, s)}" for r, s in self.error_cells(m)]

    def emission_names(self, labels: list[str]) -> list[str]:
        if not self.has_dirichlet:
            return []
        return [
            f"lambda.{s + 1}.{band}" for s in range(len(labels)) for band in self.bands
        ]

    def misclassification_matrix(self, logits: np.ndarray, m: int) -> np.ndarray:
        """Row-stochastic matrix E[true, observed].

        Each row is a softmax over its stay cell (reference, logit 0) and
        its free error cells. Cells outside the pattern stay exactly 0.
        """
        if not self.has_categorical:
            return np.eye(m)
        cells = self.error_cells(m)
        logits = np.asarray(logits, dtype=float)
        if logits.shape != (len(cells),):
            raise DimensionMismatchError(
                f"Expected {len(cells)} misclassification logits, got {logits.shape}"
            )
        E = np.eye(m)
        for r in range(m):
            row_cells = [(k, s) for k, (rr, s) in enumerate(cells) if rr == r]
            if not row_cells:
                continue
            probs = softmax(np.concatenate([[0.0], logits[[k for k, _ in row_cells]]]))
            E[r, r] = probs[0]
            for (_, s), p in zip(row_cells, probs[1:]):
                E[r, s] = p
        return E

    def concentrations(self, log_concentrations: np.ndarray, m: int) -> np.ndarray:
        """Dirichlet concentrations, shape (m, bands)."""
        k = len(self.bands)
        values = np.asarray(log_concentrations, dtype=float)
        if values.shape != (m * k,):
            raise DimensionMismatchError(
                f"Expected {m * k} log concentrations, got {values.shape}"
            )
        return np.exp(values).reshape(m, k)


def dirichlet_logpdf(x: np.ndarray, concentrations: np.ndarray) -> np.ndarray:
    """Log density of one simplex vector under every state's Dirichlet.

    `concentrations` has shape (m, K); the result has shape (m,).
    """
    x = np.asarray(x, dtype=float)
    normalizer = gammaln(concentrations.sum(axis=1)) - gammaln(concentrations).sum(
        axis=1
    )
    return normalizer + xlogy(concentrations - 1.0, x[None, :]).sum(axis=1)
