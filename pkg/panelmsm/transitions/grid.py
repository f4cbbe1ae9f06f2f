"""Piecewise-constant time grid with origin 0."""

import math
from typing import NamedTuple

import numpy as np

# tolerance used to snap t/d onto an integer
GRID_SNAP = 1e-9


def cell_index(t: float, d: float) -> int:
    """Index k of the grid cell [k*d, (k+1)*d) holding t."""
    q = t / d
    k = round(q)
    if abs(q - k) <= GRID_SNAP * max(1.0, abs(k)):
        return int(k)
    return math.floor(q)


def g_d(t: float, d: float) -> float:
    """Largest multiple of d not exceeding t."""
    if not d > 0:
        raise ValueError(f"Grid resolution must be positive, got {d}")
    return cell_index(t, d) * d


def g_d_array(t: np.ndarray, d: float) -> np.ndarray:
    """Vectorized g_d with the same snapping."""
    if not d > 0:
        raise ValueError(f"Grid resolution must be positive, got {d}")
    q = np.asarray(t, dtype=float) / d
    k = np.round(q)
    snapped = np.abs(q - k) <= GRID_SNAP * np.maximum(1.0, np.abs(k))
    return np.where(snapped, k, np.floor(q)) * d


class PiecewiseGrid(NamedTuple):
    d: float

    @classmethod
    def create(cls, d: float) -> "PiecewiseGrid":
        if not (d > 0 and math.isfinite(d)):
            raise ValueError(f"Grid resolution must be positive, got {d}")
        return cls(d=float(d))

    def floor(self, t: float) -> float:
        return g_d(t, self.d)

    def cell(self, t: float) -> int:
        return cell_index(t, self.d)

    def segments(self, t: float, h: float) -> list[tuple[int, float]]:
        """Cells and widths of the factors of P(t, t+h).

        One factor when t and t+h share a cell; otherwise a partial first
        cell, whole interior cells and a partial last cell. Zero-width
        factors are dropped.
        """
        if h <= 0:
            return []
        first = self.cell(t)
        last = self.cell(t + h)
        if first == last:
            return [(last, h)]
        result = []
        head = (first + 1) * self.d - t
        if head > 0:
            result.append((first, head))
        for k in range(first + 1, last):
            result.append((k, self.d))
        tail = t + h - last * self.d
        if tail > 0:
            result.append((last, tail))
        return result
