"""Heightmaps, procedural rough/gap terrain, and step-adjustment queries.

A heightmap is a regular grid of node heights (row-major, rows along y,
columns along x) with a per-node support mask: masked nodes stand in for
non-supporting ground (gaps) while keeping interpolation well defined at
gap edges. Steppability asks for foot-sized flat support; the snap query
moves an unsteppable target to the closest steppable point.

JSON interchange format:
    {"origin": [x, y], "resolution": r, "rows": m, "cols": n,
     "heights": [...], "mask": [...]}   # row-major, len == rows*cols
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

FOOT_RADIUS = 0.07
MAX_HEIGHT_DEV = 0.03
SNAP_SEARCH_RADIUS = 1.0

ROUGH_AMPLITUDE = 0.05
ROUGH_CORRELATION = 0.5


@dataclass(frozen=True)
class Heightmap:
    origin: np.ndarray
    resolution: float
    heights: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        origin = np.array(self.origin, dtype=np.float64).reshape(2)
        heights = np.array(self.heights, dtype=np.float64, order="C")
        if heights.ndim != 2 or heights.shape[0] < 2 or heights.shape[1] < 2:
            raise ValueError(f"heights must be a 2D grid of at least 2x2 nodes, got {heights.shape}")
        if not np.all(np.isfinite(heights)):
            raise ValueError("heights must be finite")
        if not (self.resolution > 0.0 and math.isfinite(self.resolution)):
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        mask = np.array(self.mask, dtype=np.uint8, order="C")
        if mask.shape != heights.shape:
            raise ValueError(f"mask shape {mask.shape} must match heights {heights.shape}")
        for arr in (origin, heights, mask):
            arr.flags.writeable = False
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "mask", mask)

    @property
    def rows(self) -> int:
        return self.heights.shape[0]

    @property
    def cols(self) -> int:
        return self.heights.shape[1]

    @property
    def x_max(self) -> float:
        return float(self.origin[0] + (self.cols - 1) * self.resolution)

    @property
    def y_max(self) -> float:
        return float(self.origin[1] + (self.rows - 1) * self.resolution)

    def contains(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        return bool(_kernels.grid_contains(self.rows, self.cols,
                                           self.origin[0], self.origin[1],
                                           self.resolution, x, y))

    def to_dict(self) -> dict:
        return {
            "origin": [float(self.origin[0]), float(self.origin[1])],
            "resolution": float(self.resolution),
            "rows": self.rows,
            "cols": self.cols,
            "heights": [float(h) for h in self.heights.ravel()],
            "mask": [int(m) for m in self.mask.ravel()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Heightmap":
        rows, cols = int(d["rows"]), int(d["cols"])
        heights = np.asarray(d["heights"], dtype=np.float64)
        if heights.size != rows * cols:
            raise ValueError(f"rows*cols = {rows * cols} but got {heights.size} heights")
        mask = np.asarray(d.get("mask", np.zeros(rows * cols)), dtype=np.uint8)
        if mask.size != rows * cols:
            raise ValueError(f"rows*cols = {rows * cols} but got {mask.size} mask entries")
        return cls(origin=np.asarray(d["origin"], dtype=np.float64),
                   resolution=float(d["resolution"]),
                   heights=heights.reshape(rows, cols),
                   mask=mask.reshape(rows, cols))

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "Heightmap":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class TerrainSpec:
    """Terrain kind plus parameters.

    kind 'flat': no parameters.
    kind 'rough': amplitude (height bound, m), correlation (m), seed.
    kind 'gap': width (m), period (m), offset of the first gap edge (m).
    A gap width >= period leaves no supporting ground; such degenerate
    specs are accepted and simply fail at the first snap.
    """

    kind: str = "flat"
    amplitude: float = ROUGH_AMPLITUDE
    correlation: float = ROUGH_CORRELATION
    seed: int = 0
    gap_width: float = 0.15
    gap_period: float = 0.8
    gap_offset: float | None = None

    def __post_init__(self):
        if self.kind not in ("flat", "rough", "gap"):
            raise ValueError(f"unknown terrain kind {self.kind!r}")
        if self.amplitude < 0.0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")
        if self.kind == "rough" and self.correlation <= 0.0:
            raise ValueError(f"correlation length must be positive, got {self.correlation}")
        if self.kind == "gap" and (self.gap_width <= 0.0 or self.gap_period <= 0.0):
            raise ValueError("gap width and period must be positive")
        if self.gap_offset is None:
            object.__setattr__(self, "gap_offset", self.gap_period / 2.0)

    def with_seed(self, seed: int) -> "TerrainSpec":
        return TerrainSpec(kind=self.kind, amplitude=self.amplitude,
                           correlation=self.correlation, seed=seed,
                           gap_width=self.gap_width, gap_period=self.gap_period,
                           gap_offset=self.gap_offset)


def parse_spec(text: str) -> "TerrainSpec | str":
    """Parse the CLI terrain grammar.

    flat | rough:<amp>:<corr>:<seed> | gap:<width>:<period>[:<offset>]
         | file:<path>
    Returns a TerrainSpec, or the path string for file specs.
    """
    parts = text.split(":")
    kind = parts[0]
    try:
        if kind == "flat" and len(parts) == 1:
            return TerrainSpec(kind="flat")
        if kind == "rough" and len(parts) == 4:
            return TerrainSpec(kind="rough", amplitude=float(parts[1]),
                               correlation=float(parts[2]), seed=int(parts[3]))
        if kind == "gap" and len(parts) in (3, 4):
            offset = float(parts[3]) if len(parts) == 4 else None
            return TerrainSpec(kind="gap", gap_width=float(parts[1]),
                               gap_period=float(parts[2]), gap_offset=offset)
        if kind == "file" and len(parts) >= 2:
            return text.split(":", 1)[1]
    except ValueError as e:
        raise ValueError(f"bad terrain spec {text!r}: {e}") from None
    raise ValueError(f"bad terrain spec {text!r}")


def height_at(h: Heightmap, p) -> float:
    """Bilinear interpolation of the four surrounding node heights."""
    x, y = float(p[0]), float(p[1])
    if not h.contains((x, y)):
        raise ValueError(f"query point ({x}, {y}) outside heightmap bounds")
    return float(_kernels.grid_bilinear(h.heights, h.origin[0], h.origin[1],
                                        h.resolution, x, y))


def is_steppable(h: Heightmap, p, radius: float = FOOT_RADIUS,
                 max_dev: float = MAX_HEIGHT_DEV) -> bool:
    """Foot-sized flat support test; False outside the map or in a gap."""
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    return bool(_kernels.steppable(h.heights, h.mask, h.origin[0], h.origin[1],
                                   h.resolution, float(p[0]), float(p[1]),
                                   radius, max_dev))


def nearest_steppable(h: Heightmap, p, radius: float = FOOT_RADIUS,
                      max_dev: float = MAX_HEIGHT_DEV,
                      max_search: float = SNAP_SEARCH_RADIUS) -> np.ndarray:
    """Steppable point closest to p (ties to smaller x, then smaller y).

    Raises ValueError when no steppable ground lies within max_search.
    """
    ok, sx, sy = _kernels.snap_to_steppable(
        h.heights, h.mask, h.origin[0], h.origin[1], h.resolution,
        float(p[0]), float(p[1]), radius, max_dev, max_search)
    if not ok:
        raise ValueError(
            f"no steppable ground within {max_search} m of ({p[0]}, {p[1]})")
    return np.array([sx, sy])


def generate(spec: TerrainSpec, extent, resolution: float) -> Heightmap:
    """Build a heightmap on extent = (x0, y0, x1, y1) at the given resolution.

    Deterministic in (spec, extent, resolution). Rough terrain is bilinear
    value noise: an independent uniform height in [-amplitude, amplitude]
    per lattice cell of the correlation length, interpolated to the grid.
    Gap terrain is flat with periodic non-supporting strips across x; nodes
    strictly inside a strip are masked.
    """
    x0, y0, x1, y1 = (float(v) for v in extent)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"empty extent {extent}")
    if resolution <= 0.0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    cols = max(2, int(math.ceil((x1 - x0) / resolution)) + 1)
    rows = max(2, int(math.ceil((y1 - y0) / resolution)) + 1)
    xs = x0 + resolution * np.arange(cols)
    heights = np.zeros((rows, cols))
    mask = np.zeros((rows, cols), dtype=np.uint8)

    if spec.kind == "rough" and spec.amplitude > 0.0:
        rng = np.random.default_rng(spec.seed)
        corr = spec.correlation
        lat_x0 = math.floor(x0 / corr) - 1
        lat_y0 = math.floor(y0 / corr) - 1
        lat_cols = int(math.ceil(x1 / corr)) - lat_x0 + 2
        lat_rows = int(math.ceil(y1 / corr)) - lat_y0 + 2
        lattice = rng.uniform(-spec.amplitude, spec.amplitude, (lat_rows, lat_cols))
        ys = y0 + resolution * np.arange(rows)
        gx = xs / corr - lat_x0
        gy = ys / corr - lat_y0
        jx = np.clip(np.floor(gx).astype(np.int64), 0, lat_cols - 2)
        iy = np.clip(np.floor(gy).astype(np.int64), 0, lat_rows - 2)
        fx = (gx - jx)[None, :]
        fy = (gy - iy)[:, None]
        iy = iy[:, None]
        jx = jx[None, :]
        heights = (lattice[iy, jx] * (1 - fy) * (1 - fx)
                   + lattice[iy, jx + 1] * (1 - fy) * fx
                   + lattice[iy + 1, jx] * fy * (1 - fx)
                   + lattice[iy + 1, jx + 1] * fy * fx)
    elif spec.kind == "gap":
        rel = np.mod(xs - spec.gap_offset, spec.gap_period)
        in_gap = (rel > 1e-12) & (rel < spec.gap_width - 1e-12)
        mask[:, in_gap] = 1

    return Heightmap(origin=np.array([x0, y0]), resolution=resolution,
                     heights=heights, mask=mask)
