import re

from pydantic import Field, validator

from panelmsm.types import LABEL_REGEX, PMModel


class StateSpace(PMModel):
    """Finite state space of the latent process.

    State indices are 0-based inside the package; configs, CSVs and
    parameter names use 1-based indices.
    """

    labels: list[str] = Field(
        ...,
        title="State labels",
        description="Distinct state names, one per state",
        example=["well", "mild", "severe", "dead"],
    )
    absorbing: list[int] = Field(
        default_factory=list,
        title="Absorbing states",
        description="0-based indices of states with all-zero exit rates",
        example=[3],
    )

    @validator("labels")
    def validate_labels(cls, value: list[str]) -> list[str]:
        if len(value) < 2:
            raise ValueError("A state space needs at least two states")
        if len(set(value)) != len(value):
            raise ValueError("State labels must be distinct")
        for label in value:
            if not re.match(LABEL_REGEX, label):
                raise ValueError(f"State label '{label}' does not match {LABEL_REGEX}")
        return value

    @validator("absorbing")
    def validate_absorbing(cls, value: list[int], values) -> list[int]:
        labels = values.get("labels") or []
        for index in value:
            if not 0 <= index < len(labels):
                raise ValueError(f"Absorbing state index {index + 1} is out of range")
        return sorted(set(value))

    @property
    def m(self) -> int:
        return len(self.labels)

    def index(self, label: str | int) -> int:
        """Return the 0-based index of a label or a 1-based index."""
        if isinstance(label, int):
            if not 1 <= label <= self.m:
                raise ValueError(f"State index {label} is out of range")
            return label - 1
        if label.isdigit():
            return self.index(int(label))
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"Unknown state label '{label}'") from None
