"""Timing statistics, annotation budget arithmetic, split planning and
point-location density analysis."""
from __future__ import annotations

import csv
import io
import math
import random
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .model import Box, normalize_point, point_inside_unit

P_SENTINEL = 1e-300  # reported when variance is zero but the mean is not

BOX_FRACTION_GRID = tuple(round(0.20 + 0.05 * i, 2) for i in range(9))  # 0.20 .. 0.60


class AnalysisError(ValueError):
    pass


@dataclass
class TimingRecord:
    video_id: str
    t_otf_s: float
    t_bbox_s: float


@dataclass
class TimingReport:
    n: int
    mean_ratio: float
    mean_t_otf: float
    mean_t_bbox: float
    p_value: float
    fit_slope: float
    fit_intercept: float
    mean_of_ratios: float
    test_name: str = "paired_t_two_sided"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_ratio": self.mean_ratio,
            "mean_t_otf": self.mean_t_otf,
            "mean_t_bbox": self.mean_t_bbox,
            "p_value": self.p_value,
            "fit_slope": self.fit_slope,
            "fit_intercept": self.fit_intercept,
            "mean_of_ratios": self.mean_of_ratios,
            "test_name": self.test_name,
        }


def paired_test(diffs: Sequence[float]) -> float:
    """Two-sided paired t-test p-value for a list of per-item differences.

    t = mean(d) / (sd(d) / sqrt(n)) with df = n - 1 and sample sd. Zero
    variance degenerates: p = 1 when the mean is also zero, otherwise the
    p-value underflows any meaningful scale and is reported as the 1e-300
    sentinel.
    """
    n = len(diffs)
    if n < 2:
        raise AnalysisError("paired test needs at least 2 differences")
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        return 1.0 if mean == 0.0 else P_SENTINEL
    t = mean / math.sqrt(var / n)
    p = 2.0 * float(stats.t.sf(abs(t), n - 1))
    return min(1.0, max(p, P_SENTINEL) if p > 0 else P_SENTINEL)


def ols_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Ordinary least squares of y on x -> (slope, intercept).

    When every x is identical the regression is degenerate; the fit falls
    back to the proportional line through the origin and the common point.
    """
    n = len(xs)
    if n < 2:
        raise AnalysisError("OLS needs at least 2 points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0.0:
        if mx == 0.0:
            raise AnalysisError("OLS undefined: all x identical and zero")
        return my / mx, 0.0
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return slope, my - slope * mx


def speedup_stats(records: Sequence[TimingRecord]) -> TimingReport:
    """Compare per-video annotation times between the two methods.

    mean_ratio is the ratio of mean times (mean-of-ratios is reported
    alongside for transparency); the p-value comes from a two-sided paired
    t-test on the raw differences; the fitted line is OLS of the box-method
    time on the point-method time.
    """
    if len(records) < 2:
        raise AnalysisError("need at least 2 timing records")
    for r in records:
        if r.t_otf_s <= 0 or r.t_bbox_s <= 0:
            raise AnalysisError(f"non-positive time for video {r.video_id}")
    otf = [r.t_otf_s for r in records]
    bbox = [r.t_bbox_s for r in records]
    mean_otf = sum(otf) / len(otf)
    mean_bbox = sum(bbox) / len(bbox)
    slope, intercept = ols_fit(otf, bbox)
    return TimingReport(
        n=len(records),
        mean_ratio=mean_bbox / mean_otf,
        mean_t_otf=mean_otf,
        mean_t_bbox=mean_bbox,
        p_value=paired_test([b - o for b, o in zip(bbox, otf)]),
        fit_slope=slope,
        fit_intercept=intercept,
        mean_of_ratios=sum(b / o for b, o in zip(bbox, otf)) / len(records),
    )


def load_timing_csv(text: str) -> list[TimingRecord]:
    """Parse a timing CSV with columns video_id,t_otf_s,t_bbox_s."""
    reader = csv.DictReader(io.StringIO(text))
    required = {"video_id", "t_otf_s", "t_bbox_s"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise AnalysisError(f"timing CSV must have columns {sorted(required)}")
    return [
        TimingRecord(row["video_id"], float(row["t_otf_s"]), float(row["t_bbox_s"]))
        for row in reader
    ]


def timing_records_csv(records: Sequence[TimingRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["video_id", "t_otf_s", "t_bbox_s"])
    for r in records:
        w.writerow([r.video_id, repr(r.t_otf_s), repr(r.t_bbox_s)])
    return out.getvalue()


# ---------------------------------------------------------------------------
# budgets

@dataclass
class BudgetModel:
    """Per-video average annotation times (minutes) and set sizes."""

    t_bbox_per_video: float
    t_otf_per_video: float
    n_box_otf: int
    n_weak_otf: int
    n_box_bbox: int = 0

    def validate(self) -> None:
        if self.t_bbox_per_video <= 0 or self.t_otf_per_video <= 0:
            raise AnalysisError("per-video times must be > 0")
        if min(self.n_box_otf, self.n_weak_otf, self.n_box_bbox) < 0:
            raise AnalysisError("set sizes must be >= 0")


@dataclass
class BudgetMatch:
    n_box_bbox: int
    residual_minutes: float


def budget_otf(m: BudgetModel) -> float:
    """Total expert minutes of the mixed box + point scenario."""
    m.validate()
    return m.t_bbox_per_video * m.n_box_otf + m.t_otf_per_video * m.n_weak_otf


def budget_bbox(m: BudgetModel) -> float:
    """Total expert minutes of the box-only scenario."""
    m.validate()
    return m.t_bbox_per_video * m.n_box_bbox


def match_budget(m: BudgetModel) -> BudgetMatch:
    """Box-only video count whose budget best matches the mixed scenario.

    Rounds half-to-even, so the leftover |B_bbox - B_otf| never exceeds
    half of one box-annotated video's time.
    """
    target = budget_otf(m)
    n = int(round(target / m.t_bbox_per_video))
    return BudgetMatch(n_box_bbox=n, residual_minutes=abs(n * m.t_bbox_per_video - target))


# ---------------------------------------------------------------------------
# split planning

def split_plan(video_ids: Sequence[str], seed: int, box_fraction: float) -> dict[str, str]:
    """Partition videos 70/10/20 train/val/test, then split train into
    box-level and weakly annotated subsets.

    Counts use largest-remainder rounding (remainder ties go to the split
    with the smaller floor count). Deterministic for a given seed.
    """
    n = len(video_ids)
    if n < 10:
        raise AnalysisError("need at least 10 videos to split")
    if len(set(video_ids)) != n:
        raise AnalysisError("video ids must be unique")
    grid = [round(f, 2) for f in BOX_FRACTION_GRID]
    if round(box_fraction, 2) not in grid:
        warnings.warn(
            f"box_fraction {box_fraction} outside the sweep grid {grid[0]}..{grid[-1]}",
            stacklevel=2,
        )
    counts = _largest_remainder(n, (0.70, 0.10, 0.20))
    n_train, n_val, n_test = counts
    ids = list(video_ids)
    random.Random(seed).shuffle(ids)
    test = ids[:n_test]
    val = ids[n_test:n_test + n_val]
    train = ids[n_test + n_val:]
    n_box = min(n_train, max(0, round(box_fraction * n_train)))
    split = {vid: "test" for vid in test}
    split.update({vid: "val" for vid in val})
    split.update({vid: "train_box" for vid in train[:n_box]})
    split.update({vid: "train_weak" for vid in train[n_box:]})
    return split


def _largest_remainder(n: int, fractions: Sequence[float]) -> list[int]:
    raw = [f * n for f in fractions]
    counts = [int(math.floor(x)) for x in raw]
    remainders = [x - c for x, c in zip(raw, counts)]
    # ties favour the smaller bucket, then earlier position
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], counts[i]))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


# ---------------------------------------------------------------------------
# point-in-box rate and density

class MissingPairingError(AnalysisError):
    def __init__(self, frames: Sequence[tuple[str, int]]):
        self.frames = list(frames)
        super().__init__(f"points without a ground-truth box: {self.frames[:10]}")


def pair_points_with_boxes(
    annos: Iterable, gt: Mapping[tuple[str, int], Box]
) -> list[tuple[tuple[float, float], Box]]:
    """Pair frame annotations carrying points with per-frame GT boxes.

    Raises MissingPairingError listing (video_id, frame_idx) for any point
    lacking a box.
    """
    pairs = []
    missing = []
    for a in annos:
        if a.point is None:
            continue
        key = (a.video_id, a.frame_idx)
        box = gt.get(key)
        if box is None:
            missing.append(key)
        else:
            pairs.append((a.point, box))
    if missing:
        raise MissingPairingError(missing)
    return pairs


def inside_rate(pairs: Sequence[tuple[tuple[float, float], Box]]) -> float:
    """Fraction of points whose normalized position lies in the unit square."""
    if not pairs:
        raise AnalysisError("inside_rate needs at least one point/box pair")
    inside = sum(1 for p, b in pairs if point_inside_unit(normalize_point(p, b)))
    return inside / len(pairs)


@dataclass
class DensityGrid:
    resolution: int
    cells: np.ndarray  # [iy, ix], cell centers ((ix+.5)/res, (iy+.5)/res)
    bandwidth: tuple[float, float]

    @property
    def cell_area(self) -> float:
        return 1.0 / (self.resolution * self.resolution)

    @property
    def mass(self) -> float:
        return float(self.cells.sum() * self.cell_area)

    def normalized(self) -> "DensityGrid":
        total = self.cells.sum() * self.cell_area
        if total <= 0:
            raise AnalysisError("cannot normalize an empty density grid")
        return DensityGrid(self.resolution, self.cells / total, self.bandwidth)

    def argmax_cell(self) -> tuple[int, int]:
        iy, ix = np.unravel_index(int(self.cells.argmax()), self.cells.shape)
        return int(ix), int(iy)

    def argmax_center(self) -> tuple[float, float]:
        ix, iy = self.argmax_cell()
        return (ix + 0.5) / self.resolution, (iy + 0.5) / self.resolution

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out)
        for row in self.cells:
            w.writerow([repr(float(v)) for v in row])
        return out.getvalue()


BANDWIDTH_FLOOR = 1e-3


def scott_bandwidth(values: np.ndarray) -> float:
    """Scott's rule for one axis of a 2-D sample: n^(-1/6) * sigma."""
    sigma = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return max(len(values) ** (-1.0 / 6.0) * sigma, BANDWIDTH_FLOOR)


def kde_density(
    points: Sequence[tuple[float, float]],
    resolution: int = 64,
    bandwidth: tuple[float, float] | None = None,
) -> DensityGrid:
    """Gaussian product-kernel density of normalized point locations.

    Evaluated at the cell centers of a resolution x resolution grid over
    the unit square. Points outside [0,1]^2 still contribute mass; the grid
    is rescaled so that it integrates to the kernel mass that actually falls
    in bounds (so a heavily out-of-box sample shows as a light grid).
    """
    if len(points) < 2:
        raise AnalysisError("KDE needs at least 2 points")
    if resolution < 1:
        raise AnalysisError("resolution must be >= 1")
    pts = np.asarray(points, dtype=float)
    if bandwidth is None:
        h_u, h_v = scott_bandwidth(pts[:, 0]), scott_bandwidth(pts[:, 1])
    else:
        h_u = max(float(bandwidth[0]), BANDWIDTH_FLOOR)
        h_v = max(float(bandwidth[1]), BANDWIDTH_FLOOR)
    centers = (np.arange(resolution) + 0.5) / resolution
    du = (centers[None, :] - pts[:, 0][:, None]) / h_u  # [point, ix]
    dv = (centers[None, :] - pts[:, 1][:, None]) / h_v  # [point, iy]
    ku = np.exp(-0.5 * du**2) / (h_u * math.sqrt(2 * math.pi))
    kv = np.exp(-0.5 * dv**2) / (h_v * math.sqrt(2 * math.pi))
    cells = (kv.T @ ku) / len(pts)  # [iy, ix]
    # rescale the Riemann sum to the exact in-bounds kernel mass
    mass_u = _normal_interval_mass(pts[:, 0], h_u)
    mass_v = _normal_interval_mass(pts[:, 1], h_v)
    target = float((mass_u * mass_v).mean())
    riemann = float(cells.sum()) / (resolution * resolution)
    if riemann > 0:
        cells = cells * (target / riemann)
    return DensityGrid(resolution=resolution, cells=cells, bandwidth=(h_u, h_v))


def _normal_interval_mass(mu: np.ndarray, h: float) -> np.ndarray:
    from scipy.special import ndtr

    return ndtr((1.0 - mu) / h) - ndtr((0.0 - mu) / h)


def normalized_otf_points(meta, otf_tracks, box_tracks) -> list[tuple[float, float]]:
    """(u, v) for every aligned point, relative to the interpolated box of
    the same instance at the same frame. Frames without a box are skipped;
    this is how point tracks line up against the box annotations of the
    same videos for the density plot.
    """
    from .session import align_to_frames, interpolate_box

    by_instance = {t.instance_id: t for t in box_tracks}
    pts = []
    for track in otf_tracks:
        box_track = by_instance.get(track.instance_id)
        if box_track is None:
            continue
        for anno in align_to_frames(track, meta):
            box = interpolate_box(box_track, anno.frame_idx / meta.fps)
            if box is not None:
                pts.append(normalize_point(anno.point, box))
    return pts
