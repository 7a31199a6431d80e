"""Per-region displacement-magnitude time series over a frame sequence.

Each series row holds, for one frame index, the mean Euclidean displacement
magnitude sqrt(u^2 + v^2) over a region's valid flow pixels. Reference mode
measures every frame against frame 0 (the neutral face); consecutive mode
measures frame-to-frame motion. Values are optionally normalized by the image
diagonal so they are resolution-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySequence, UnknownRegion
from .flow import FlowField, FlowParams, lucas_kanade, pyramidal_lk
from .imageio import FrameSequence
from .regions import GridSpec, RegionMap, region_mask

__all__ = [
    "FlowVector",
    "IntensitySeries",
    "displacement_magnitude",
    "region_mean_magnitude",
    "intensity_series",
]


@dataclass(frozen=True)
class FlowVector:
    """A displaced coordinate (xi, yi) and its reference coordinate (x, y)."""

    xi: float
    yi: float
    x: float = 0.0
    y: float = 0.0

    def __post_init__(self) -> None:
        for value in (self.xi, self.yi, self.x, self.y):
            if not math.isfinite(value):
                raise ValueError(f"FlowVector components must be finite, got {value}")


@dataclass(frozen=True, eq=False)
class IntensitySeries:
    """Mean displacement magnitude per region (columns) per frame (rows).

    frames[i] is the frame index row i describes; counts[i, j] is the number
    of valid flow pixels behind values[i, j] (None when loaded from CSV).
    """

    regions: tuple[str, ...]
    frames: np.ndarray
    values: np.ndarray
    units: str = "normalized"
    mode: str = "reference"
    counts: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[1] != len(self.regions):
            raise ValueError("values must be (n_frames, n_regions)")
        if self.frames.shape != (self.values.shape[0],):
            raise ValueError("frames must have one entry per values row")

    def column(self, name: str) -> np.ndarray:
        if name not in self.regions:
            raise UnknownRegion(f"no region named {name!r} in series")
        return self.values[:, self.regions.index(name)]


def displacement_magnitude(vec: FlowVector) -> float:
    """Euclidean displacement sqrt((xi - x)^2 + (yi - y)^2)."""
    return math.hypot(vec.xi - vec.x, vec.yi - vec.y)


def region_mean_magnitude(
    flow: FlowField,
    mask: np.ndarray,
    normalize: bool = False,
    diag: float = 0.0,
) -> tuple[float, int]:
    """Mean displacement magnitude over mask & valid pixels, with that count.

    Returns (0.0, 0) when no pixel qualifies. When normalize is set the mean
    is divided by diag (the image diagonal in pixels).
    """
    if mask.shape != flow.u.shape:
        raise DimensionMismatch(
            f"mask is {mask.shape[1]}x{mask.shape[0]}, flow is {flow.width}x{flow.height}"
        )
    if normalize and diag <= 0:
        raise ValueError("normalize requires a positive diag")
    selected = mask & flow.valid
    count = int(selected.sum())
    if count == 0:
        return 0.0, 0
    mean = float(np.hypot(flow.u[selected], flow.v[selected]).mean())
    if normalize:
        mean /= diag
    return mean, count


def intensity_series(
    seq: FrameSequence,
    grid: GridSpec,
    region_map: RegionMap,
    params: FlowParams = FlowParams(),
    mode: str = "reference",
    normalize: bool = True,
) -> IntensitySeries:
    """Build the per-region series for frames 1..N-1.

    reference mode pairs frame 0 with frame t; consecutive mode pairs frame
    t-1 with frame t.
    """
    if len(seq) < 2:
        raise EmptySequence(f"need at least 2 frames for flow, got {len(seq)}")
    if mode not in ("reference", "consecutive"):
        raise ValueError(f"mode must be 'reference' or 'consecutive', got {mode!r}")
    if (grid.width, grid.height) != (seq.width, seq.height):
        raise DimensionMismatch(
            f"grid is {grid.width}x{grid.height}, frames are {seq.width}x{seq.height}"
        )

    names = region_map.names()
    masks = [region_mask(grid, region_map, name) for name in names]
    diag = math.hypot(seq.width, seq.height)
    solve = lucas_kanade if params.pyramid_levels == 1 else pyramidal_lk

    n = len(seq)
    values = np.zeros((n - 1, len(names)), dtype=np.float64)
    counts = np.zeros((n - 1, len(names)), dtype=np.int64)
    for t in range(1, n):
        first = seq[0] if mode == "reference" else seq[t - 1]
        flow = solve(first, seq[t], params)
        for j, mask in enumerate(masks):
            values[t - 1, j], counts[t - 1, j] = region_mean_magnitude(
                flow, mask, normalize=normalize, diag=diag
            )

    return IntensitySeries(
        regions=names,
        frames=np.arange(1, n, dtype=np.int64),
        values=values,
        units="normalized" if normalize else "pixels",
        mode=mode,
        counts=counts,
    )
