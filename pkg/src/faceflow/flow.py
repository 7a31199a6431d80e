"""Dense Lucas-Kanade optical flow.

The brightness constancy constraint ix*u + iy*v + it = 0 is solved per pixel
by least squares over a square window, i.e. the 2x2 normal equations

    [sum ix*ix  sum ix*iy] [u]   [sum ix*it]
    [sum ix*iy  sum iy*iy] [v] = -[sum iy*it]

with window sums taken over the (2r+1)^2 neighborhood clipped to the image.
Pixels whose structure tensor is near-singular (aperture problem, flat
patches) are marked invalid. A coarse-to-fine pyramid extends the usable
displacement range beyond the ~1 px linearization limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, PyramidTooDeep
from .imageio import Image

__all__ = [
    "FlowParams",
    "GradientField",
    "FlowField",
    "gaussian_smooth",
    "spatiotemporal_gradients",
    "lucas_kanade",
    "pyramidal_lk",
    "sample_bilinear",
]


@dataclass(frozen=True)
class FlowParams:
    """Solver parameters; defaults suit normalized-intensity face frames."""

    window_radius: int = 7
    smooth_sigma: float = 1.0
    eigen_threshold: float = 1e-6
    pyramid_levels: int = 1

    def __post_init__(self) -> None:
        if self.window_radius < 1:
            raise ValueError(f"window_radius must be >= 1, got {self.window_radius}")
        if self.smooth_sigma < 0:
            raise ValueError(f"smooth_sigma must be >= 0, got {self.smooth_sigma}")
        if self.eigen_threshold < 0:
            raise ValueError(f"eigen_threshold must be >= 0, got {self.eigen_threshold}")
        if self.pyramid_levels < 1:
            raise ValueError(f"pyramid_levels must be >= 1, got {self.pyramid_levels}")


@dataclass(frozen=True, eq=False)
class GradientField:
    """Spatiotemporal derivatives of a frame pair, one raster per axis."""

    ix: np.ndarray
    iy: np.ndarray
    it: np.ndarray

    def __post_init__(self) -> None:
        if not (self.ix.shape == self.iy.shape == self.it.shape):
            raise DimensionMismatch("gradient rasters must share one shape")

    @property
    def width(self) -> int:
        return self.ix.shape[1]

    @property
    def height(self) -> int:
        return self.ix.shape[0]


@dataclass(frozen=True, eq=False)
class FlowField:
    """Per-pixel displacement (u, v) in pixels plus a validity mask.

    Wherever valid is false, u and v are zero.
    """

    u: np.ndarray
    v: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        if not (self.u.shape == self.v.shape == self.valid.shape):
            raise DimensionMismatch("flow rasters must share one shape")

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]


def _require_same_shape(i1: Image, i2: Image) -> None:
    if i1.pixels.shape != i2.pixels.shape:
        raise DimensionMismatch(
            f"frames are {i1.width}x{i1.height} and {i2.width}x{i2.height}"
        )


def _smooth_array(pixels: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0:
        return pixels
    radius = math.ceil(3 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    kernel /= kernel.sum()
    out = correlate1d(pixels, kernel, axis=0, mode="nearest")
    out = correlate1d(out, kernel, axis=1, mode="nearest")
    # Rounding can push values a hair outside [0, 1]; clamp to keep the
    # image invariant.
    return np.clip(out, 0.0, 1.0)


def gaussian_smooth(img: Image, sigma: float) -> Image:
    """Separable Gaussian blur, kernel radius ceil(3*sigma), replicate border.

    sigma = 0 returns the input unchanged.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img
    return Image(_smooth_array(img.pixels, sigma))


def _central_diff(a: np.ndarray, axis: int) -> np.ndarray:
    # Derivative kernel [-1/2, 0, +1/2] with replicate border.
    pad = [(1, 1) if ax == axis else (0, 0) for ax in range(a.ndim)]
    p = np.pad(a, pad, mode="edge")
    if axis == 0:
        return (p[2:, :] - p[:-2, :]) * 0.5
    return (p[:, 2:] - p[:, :-2]) * 0.5


def _gradient_arrays(a1: np.ndarray, a2: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    avg = (a1 + a2) * 0.5
    return _central_diff(avg, axis=1), _central_diff(avg, axis=0), a2 - a1


def spatiotemporal_gradients(i1: Image, i2: Image) -> GradientField:
    """Central-difference spatial derivatives of the frame average, it = i2 - i1."""
    _require_same_shape(i1, i2)
    ix, iy, it = _gradient_arrays(i1.pixels, i2.pixels)
    return GradientField(ix=ix, iy=iy, it=it)


def _window_summer(shape: tuple[int, int], radius: int):
    """Build a function summing each pixel's clipped square window, plus counts.

    Fields are zero-padded by the window radius so every window lies interior
    to the padded integral image; the four corner lookups then become plain
    slices and out-of-image contributions are exactly zero, which equals
    clipping the window at the image bounds.
    """
    h, w = shape
    side = 2 * radius + 1

    def sum_windows(field: np.ndarray) -> np.ndarray:
        padded = np.zeros((h + 2 * radius + 1, w + 2 * radius + 1), dtype=np.float64)
        padded[radius + 1 : radius + 1 + h, radius + 1 : radius + 1 + w] = field
        ii = padded.cumsum(axis=0).cumsum(axis=1)
        return (
            ii[side:, side:][:h, :w]
            - ii[:h, side:][:, :w]
            - ii[side:, :w][:h, :]
            + ii[:h, :w]
        )

    ys = np.arange(h)
    xs = np.arange(w)
    y_extent = np.minimum(ys + radius + 1, h) - np.maximum(ys - radius, 0)
    x_extent = np.minimum(xs + radius + 1, w) - np.maximum(xs - radius, 0)
    counts = (y_extent[:, None] * x_extent[None, :]).astype(np.float64)
    return sum_windows, counts


def _solve_lk(a1: np.ndarray, a2: np.ndarray, p: FlowParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Single-level Lucas-Kanade on raw pixel arrays; returns (u, v, valid)."""
    s1 = _smooth_array(a1, p.smooth_sigma)
    s2 = _smooth_array(a2, p.smooth_sigma)
    ix, iy, it = _gradient_arrays(s1, s2)

    sum_windows, counts = _window_summer(a1.shape, p.window_radius)
    sxx = sum_windows(ix * ix)
    sxy = sum_windows(ix * iy)
    syy = sum_windows(iy * iy)
    sxt = sum_windows(ix * it)
    syt = sum_windows(iy * it)

    # Smaller eigenvalue of the structure tensor, normalized per window pixel.
    diff = sxx - syy
    lam_min = 0.5 * ((sxx + syy) - np.sqrt(diff * diff + 4.0 * (sxy * sxy)))
    det = sxx * syy - sxy * sxy
    # det > 0 guards the eigen_threshold = 0 edge, where lam_min >= 0 alone
    # would let singular tensors through.
    valid = (lam_min >= p.eigen_threshold * counts) & (det > 0.0)

    u = np.zeros(a1.shape, dtype=np.float64)
    v = np.zeros(a1.shape, dtype=np.float64)
    np.divide(sxy * syt - syy * sxt, det, out=u, where=valid)
    np.divide(sxy * sxt - sxx * syt, det, out=v, where=valid)
    return u, v, valid


def lucas_kanade(i1: Image, i2: Image, p: FlowParams = FlowParams()) -> FlowField:
    """Dense single-level flow from i1 to i2: I2(x + u, y + v) ~ I1(x, y).

    Both frames are pre-smoothed with p.smooth_sigma; p.pyramid_levels is
    ignored here (see pyramidal_lk).
    """
    _require_same_shape(i1, i2)
    u, v, valid = _solve_lk(i1.pixels, i2.pixels, p)
    return FlowField(u=u, v=v, valid=valid)


def sample_bilinear(values: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample a 2-D array at real coordinates, clamping to the border.

    Exact copy at integer coordinates; replicate-border beyond the edges.
    """
    h, w = values.shape
    xs = np.clip(xs, 0.0, float(w - 1))
    ys = np.clip(ys, 0.0, float(h - 1))
    x0 = np.minimum(np.floor(xs).astype(np.intp), max(w - 2, 0))
    y0 = np.minimum(np.floor(ys).astype(np.intp), max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = values[y0, x0] * (1.0 - fx) + values[y0, x1] * fx
    bottom = values[y1, x0] * (1.0 - fx) + values[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def _warp_by_flow(a: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    h, w = a.shape
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    return sample_bilinear(a, xs + u, ys + v)


def _box_downsample(a: np.ndarray) -> np.ndarray:
    # 2x2 box average; odd trailing rows/columns are dropped.
    h2, w2 = a.shape[0] // 2, a.shape[1] // 2
    t = a[: 2 * h2, : 2 * w2]
    return 0.25 * (t[0::2, 0::2] + t[0::2, 1::2] + t[1::2, 0::2] + t[1::2, 1::2])


def _upsample_flow(f: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    # Nearest-neighbor 2x upsampling; displacements double with resolution.
    ys = np.minimum(np.arange(shape[0]) // 2, f.shape[0] - 1)
    xs = np.minimum(np.arange(shape[1]) // 2, f.shape[1] - 1)
    return 2.0 * f[np.ix_(ys, xs)]


def pyramidal_lk(i1: Image, i2: Image, p: FlowParams = FlowParams()) -> FlowField:
    """Coarse-to-fine flow for displacements beyond the ~1 px single-level range.

    Each level solves for the residual motion left after warping i2 by the
    upsampled coarser flow. With pyramid_levels = 1 the output is bit-identical
    to lucas_kanade.
    """
    _require_same_shape(i1, i2)
    min_dim = min(i1.width, i1.height)
    need = (1 << (p.pyramid_levels - 1)) * (2 * p.window_radius + 1)
    if min_dim < need:
        raise PyramidTooDeep(
            f"{p.pyramid_levels} levels with window radius {p.window_radius} "
            f"need min dimension >= {need}, image is {i1.width}x{i1.height}"
        )

    levels = [(i1.pixels, i2.pixels)]
    for _ in range(p.pyramid_levels - 1):
        a1, a2 = levels[-1]
        levels.append((_box_downsample(a1), _box_downsample(a2)))

    u = np.zeros(levels[-1][0].shape, dtype=np.float64)
    v = np.zeros_like(u)
    valid = np.zeros(levels[-1][0].shape, dtype=bool)
    for level, (a1, a2) in enumerate(reversed(levels)):
        if level > 0:
            u = _upsample_flow(u, a1.shape)
            v = _upsample_flow(v, a1.shape)
        if u.any() or v.any():
            a2 = _warp_by_flow(a2, u, v)
        du, dv, valid = _solve_lk(a1, a2, p)
        u = u + du
        v = v + dv

    u = np.where(valid, u, 0.0)
    v = np.where(valid, v, 0.0)
    return FlowField(u=u, v=v, valid=valid)
