"""Online self-organizing map acting as the tissue.

The grid is stored as dense numpy arrays indexed ``[row, col]`` with
``height`` rows and ``width`` columns. Initial weights come from numpy's
``PCG64`` bit generator (``numpy.random.default_rng(seed).random``), so a
golden snapshot only depends on the seed and the grid shape.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import ConfigError, InputError

Coord = tuple[int, int]


@dataclass(frozen=True)
class Schedule:
    alpha0: float = 0.5
    alpha_min: float = 0.01
    sigma0: float = 3.0
    sigma_min: float = 0.5
    tau: float = 1000.0

    def __post_init__(self) -> None:
        vals = (self.alpha0, self.alpha_min, self.sigma0, self.sigma_min, self.tau)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"schedule values must be finite: {vals}")
        if not 0 < self.alpha_min <= self.alpha0 <= 1:
            raise ConfigError(
                f"schedule requires 0 < alpha_min <= alpha0 <= 1, got "
                f"alpha_min={self.alpha_min}, alpha0={self.alpha0}"
            )
        if not 0 < self.sigma_min <= self.sigma0:
            raise ConfigError(
                f"schedule requires 0 < sigma_min <= sigma0, got "
                f"sigma_min={self.sigma_min}, sigma0={self.sigma0}"
            )
        if not self.tau > 0:
            raise ConfigError(f"schedule tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class Cell:
    """Read-only view of one grid node."""

    coord: Coord
    weights: tuple[float, ...]
    hit_count: int
    last_hit_step: Optional[int]  # None means the cell was never a BMU
    cumulative_growth: float


@dataclass
class UpdateReport:
    bmu: Coord
    bmu_distance: float
    growth_magnitude: float
    alpha_eff: float
    sigma_eff: float


@dataclass
class TissueMap:
    width: int
    height: int
    weights: np.ndarray  # (height, width, d)
    schedule: Schedule = field(default_factory=Schedule)
    hit_count: np.ndarray = None  # type: ignore[assignment]
    last_hit_step: np.ndarray = None  # type: ignore[assignment]  # -1 = never
    cumulative_growth: np.ndarray = None  # type: ignore[assignment]
    step: int = 0

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 3 or self.weights.shape[:2] != (self.height, self.width):
            raise ConfigError(
                f"weights shape {self.weights.shape} does not match "
                f"{self.height}x{self.width} grid"
            )
        shape = (self.height, self.width)
        if self.hit_count is None:
            self.hit_count = np.zeros(shape, dtype=np.int64)
        if self.last_hit_step is None:
            self.last_hit_step = np.full(shape, -1, dtype=np.int64)
        if self.cumulative_growth is None:
            self.cumulative_growth = np.zeros(shape, dtype=np.float64)

    @property
    def dim(self) -> int:
        return self.weights.shape[2]

    def cell(self, coord: Coord) -> Cell:
        r, c = coord
        last = int(self.last_hit_step[r, c])
        return Cell(
            coord=(r, c),
            weights=tuple(float(v) for v in self.weights[r, c]),
            hit_count=int(self.hit_count[r, c]),
            last_hit_step=None if last < 0 else last,
            cumulative_growth=float(self.cumulative_growth[r, c]),
        )

    def cells(self) -> Iterator[Cell]:
        """Yield every cell in row-major order."""
        for r in range(self.height):
            for c in range(self.width):
                yield self.cell((r, c))

    def copy(self) -> "TissueMap":
        return TissueMap(
            width=self.width,
            height=self.height,
            weights=self.weights.copy(),
            schedule=self.schedule,
            hit_count=self.hit_count.copy(),
            last_hit_step=self.last_hit_step.copy(),
            cumulative_growth=self.cumulative_growth.copy(),
            step=self.step,
        )


def init_grid(width: int, height: int, d: int, schedule: Schedule | None = None,
              seed: int = 0) -> TissueMap:
    for name, v in (("width", width), ("height", height), ("d", d)):
        if not isinstance(v, (int, np.integer)) or v < 1:
            raise ConfigError(f"{name} must be a positive integer, got {v!r}")
    rng = np.random.default_rng(seed)
    weights = rng.random((height, width, d))
    return TissueMap(width=int(width), height=int(height), weights=weights,
                     schedule=schedule or Schedule())


def check_vector(tmap: TissueMap, x: Sequence[float]) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != tmap.dim:
        raise InputError(f"expected a vector of dimension {tmap.dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("feature vector contains non-finite values")
    return arr


def _distances(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Accumulate component by component so every cell's sum is formed in the
    # same left-to-right order as a scalar loop would.
    diff = weights - x
    acc = diff[..., 0] * diff[..., 0]
    for k in range(1, diff.shape[-1]):
        acc = acc + diff[..., k] * diff[..., k]
    return np.sqrt(acc)


def find_bmu(tmap: TissueMap, x: Sequence[float]) -> tuple[Coord, float]:
    """Return the best matching cell and its Euclidean distance to ``x``.

    Ties resolve to the first cell in row-major order.
    """
    arr = check_vector(tmap, x)
    dist = _distances(tmap.weights, arr)
    flat = int(np.argmin(dist))
    r, c = divmod(flat, tmap.width)
    return (r, c), float(dist[r, c])


def schedule_params(tmap: TissueMap) -> tuple[float, float]:
    s = tmap.schedule
    decay = math.exp(-tmap.step / s.tau)
    return max(s.alpha_min, s.alpha0 * decay), max(s.sigma_min, s.sigma0 * decay)


def neighbourhood(height: int, width: int, centre: Coord, sigma: float) -> np.ndarray:
    """Gaussian kernel over grid distance on a bounded grid; ``sigma == 0`` is a point kernel."""
    rows = np.arange(height, dtype=np.float64)[:, None] - centre[0]
    cols = np.arange(width, dtype=np.float64)[None, :] - centre[1]
    d2 = rows * rows + cols * cols
    if sigma == 0:
        return (d2 == 0).astype(np.float64)
    return np.exp(-d2 / (2.0 * sigma * sigma))


def train_step(tmap: TissueMap, x: Sequence[float], learn_multiplier: float = 1.0) -> UpdateReport:
    """One online Kohonen update, mutating ``tmap`` in place."""
    if not (learn_multiplier >= 0 and math.isfinite(learn_multiplier)):
        raise InputError(f"learn_multiplier must be finite and >= 0, got {learn_multiplier}")
    arr = check_vector(tmap, x)
    bmu, bmu_dist = find_bmu(tmap, arr)
    alpha_base, sigma = schedule_params(tmap)
    a = min(1.0, max(0.0, alpha_base * learn_multiplier))

    old = tmap.weights
    rate = (a * neighbourhood(tmap.height, tmap.width, bmu, sigma))[..., None]
    new = old + rate * (arr - old)
    # full-rate cells land on x exactly; otherwise keep each component
    # between its old value and x so rounding can never push it outward
    new = np.where(rate == 1.0, arr, new)
    new = np.clip(new, np.minimum(old, arr), np.maximum(old, arr))

    delta = new - old
    per_cell = np.sqrt(np.sum(delta * delta, axis=-1))
    growth = float(np.sqrt(np.sum(delta * delta)))

    tmap.weights = new
    tmap.cumulative_growth += per_cell
    tmap.hit_count[bmu] += 1
    tmap.last_hit_step[bmu] = tmap.step
    tmap.step += 1
    return UpdateReport(bmu=bmu, bmu_distance=bmu_dist, growth_magnitude=growth,
                        alpha_eff=a, sigma_eff=sigma)


def grid_header(d: int) -> list[str]:
    return ["row", "col", *[f"w{i}" for i in range(d)],
            "hit_count", "last_hit_step", "cumulative_growth"]


def export_grid(tmap: TissueMap) -> list[dict]:
    """One row per cell in row-major order, keyed by the CSV header names."""
    rows = []
    for cell in tmap.cells():
        row = {"row": cell.coord[0], "col": cell.coord[1]}
        row.update({f"w{i}": w for i, w in enumerate(cell.weights)})
        row["hit_count"] = cell.hit_count
        row["last_hit_step"] = "never" if cell.last_hit_step is None else cell.last_hit_step
        row["cumulative_growth"] = cell.cumulative_growth
        rows.append(row)
    return rows


def grid_csv(tmap: TissueMap) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=grid_header(tmap.dim), lineterminator="\n")
    writer.writeheader()
    for row in export_grid(tmap):
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
