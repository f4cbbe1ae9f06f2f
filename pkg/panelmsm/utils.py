"""A set of commonly used functions."""

import datetime
import hashlib
import os
import tempfile
from typing import Any, Callable

import numpy as np
import orjson
from pydantic import BaseModel


def json_loads(data: str | bytes) -> Any:
    """Load JSON data."""
    return orjson.loads(data)


def json_default_handler(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.dict()

    if isinstance(value, datetime.datetime):
        return value.isoformat()

    if isinstance(value, np.generic):
        return value.item()

    raise TypeError(f"Type {type(value)} is not JSON serializable")


def json_dumps(
    data: Any,
    *,
    default: Callable[[Any], Any] | None = None,
    indent: bool = False,
) -> str:
    """Dump JSON data."""
    option = orjson.OPT_SERIALIZE_NUMPY
    if indent:
        option |= orjson.OPT_INDENT_2
    return orjson.dumps(
        data,
        default=default or json_default_handler,
        option=option,
    ).decode()


def hash_file(path: str) -> str:
    """SHA-256 of a file's bytes."""
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            sha.update(chunk)
    return sha.hexdigest()


def atomic_write(path: str, content: str | bytes) -> None:
    """Write a file so that readers never observe a partial result."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    mode = "wb" if isinstance(content, bytes) else "w"
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as f:
            f.write(content)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def seed_sequence(*keys: int) -> np.random.SeedSequence:
    """Derive an independent RNG stream from a tuple of integer keys.

    Streams depend only on the keys, so results do not depend on the
    order in which subjects or chains are processed.
    """
    return np.random.SeedSequence([int(k) for k in keys])


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(*keys))
