"""Discretized paths and fibre descriptions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PathGrid:
    """An ordered set of parameter samples along a path, with base-point labels.

    ``params`` must be strictly increasing; ``base_labels`` names the base
    point under each sample and is treated as opaque.
    """

    params: tuple[float, ...]
    base_labels: tuple[str, ...]

    def __post_init__(self):
        params = tuple(float(s) for s in self.params)
        labels = tuple(str(x) for x in self.base_labels)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "base_labels", labels)
        if len(params) == 0:
            raise ValueError("a path grid needs at least one sample")
        if len(labels) != len(params):
            raise ValueError(
                f"{len(labels)} labels for {len(params)} parameter samples"
            )
        if not all(np.isfinite(params)):
            raise ValueError("path parameters must be finite")
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ValueError("path parameters must be strictly increasing")

    def __len__(self) -> int:
        return len(self.params)

    @classmethod
    def uniform(cls, n_samples: int, start: float = 0.0, stop: float = 1.0) -> "PathGrid":
        """Evenly spaced grid with auto-generated labels x0..x{N}."""
        params = np.linspace(start, stop, n_samples)
        return cls(tuple(params), tuple(f"x{i}" for i in range(n_samples)))


@dataclass(frozen=True)
class FiberSpec:
    """Dimension of the (real) model fibre."""

    dim: int
    field: str = "real"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("fibre dimension must be positive")
        if self.field != "real":
            raise ValueError("only real fibres are supported")
