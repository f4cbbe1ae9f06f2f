import datetime
import os
import sys
import time
from typing import Any

from nxtools import logging
from pydantic import Field

from panelmsm.types import PMModel
from panelmsm.utils import atomic_write, hash_file, json_dumps
from panelmsm.version import __version__

MANIFEST_NAME = "manifest.json"


class RunManifest(PMModel):
    """What a command read, how it ran and what it wrote."""

    command: str = Field(..., description="Subcommand name")
    argv: list[str] = Field(default_factory=lambda: list(sys.argv[1:]))
    arguments: dict[str, Any] = Field(default_factory=dict)
    config_path: str | None = None
    data_paths: list[str] = Field(default_factory=list)
    seed: int | None = None
    engine: str | None = None
    out_dir: str | None = None
    started_at: str = Field(
        default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat()
    )
    timings: dict[str, float] = Field(
        default_factory=dict,
        description="Wall-clock seconds per stage",
    )
    inputs: dict[str, str] = Field(
        default_factory=dict,
        description="SHA-256 of every input file",
    )
    outputs: dict[str, str] = Field(
        default_factory=dict,
        description="SHA-256 of every output file",
    )
    version: str = __version__

    @classmethod
    def from_args(cls, command: str, args: Any, **kwargs: Any) -> "RunManifest":
        arguments = {k: v for k, v in vars(args).items() if not callable(v)}
        return cls(command=command, arguments=arguments, **kwargs)

    def add_input(self, path: str) -> None:
        self.inputs[path] = hash_file(path)

    def add_outputs(self, paths: list[str]) -> None:
        for path in paths:
            self.outputs[path] = hash_file(path)

    def timer(self, name: str) -> "StageTimer":
        return StageTimer(self, name)


class StageTimer:
    def __init__(self, manifest: RunManifest, name: str) -> None:
        self.manifest = manifest
        self.name = name
        self.start = 0.0

    def __enter__(self) -> "StageTimer":
        self.start = time.perf_counter()
        return self

    def __exit__(self, *args) -> None:
        elapsed = time.perf_counter() - self.start
        self.manifest.timings[self.name] = elapsed


def write_manifest(manifest: RunManifest, out_dir: str) -> str:
    path = os.path.join(out_dir, MANIFEST_NAME)
    atomic_write(path, json_dumps(manifest.dict(), indent=True))
    logging.info(f"Manifest written to {path}")
    return path
