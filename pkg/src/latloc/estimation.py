"""Collapse a candidate point cloud into one location estimate.

A local grid search minimizes the mean great-circle distance to the cloud,
halving the grid spacing whenever no neighboring grid point improves, and an
iterative filter discards the candidates farthest from the running center
(false branches of two-point intersections, mostly) before the final search.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EstimationError
from .geodesy import EARTH_RADIUS_M, GeoPoint
from .lateration import DEFAULT_GAP_MAX_KM, CandidatePoint, LandmarkCircle, all_candidates


@dataclass(frozen=True)
class GridSearchConfig:
    """Grid spacing schedule: start at eps0_m, halve until below eps_min_m."""

    eps0_m: float = 100_000.0
    eps_min_m: float = 500.0
    extent: int = 3  # offsets up to +-extent * eps in each axis

    def __post_init__(self):
        if self.eps_min_m <= 0 or self.eps0_m < self.eps_min_m:
            raise ValueError("need eps0_m >= eps_min_m > 0")
        if self.extent < 1:
            raise ValueError("grid extent must be >= 1")


@dataclass(frozen=True)
class FilterConfig:
    rounds: int = 2
    drop_fraction: float = 0.25


@dataclass(frozen=True)
class EstimatedLocation:
    point: GeoPoint
    kept_points: tuple[CandidatePoint, ...]
    dropped_points: tuple[CandidatePoint, ...]
    mean_residual_km: float

    def to_json(self) -> str:
        def cand(c: CandidatePoint) -> dict:
            return {
                "lat": c.point.lat, "lon": c.point.lon,
                "source_pair": list(c.source_pair), "case_tag": c.case_tag,
                "weight": c.weight,
            }
        doc = {
            "estimate": {"lat": self.point.lat, "lon": self.point.lon},
            "kept_points": [cand(c) for c in self.kept_points],
            "dropped_points": [cand(c) for c in self.dropped_points],
            "mean_residual_km": self.mean_residual_km,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


class _Cloud:
    """Cached radian arrays for fast mean-distance evaluation."""

    def __init__(self, points: list[GeoPoint]):
        self.lat = np.radians([p.lat for p in points])
        self.lon = np.radians([p.lon for p in points])
        self.sin_lat = np.sin(self.lat)
        self.cos_lat = np.cos(self.lat)

    def mean_distance_m(self, p: GeoPoint) -> float:
        phi = math.radians(p.lat)
        lam = math.radians(p.lon)
        dlon = self.lon - lam
        num = np.hypot(
            self.cos_lat * np.sin(dlon),
            math.cos(phi) * self.sin_lat - math.sin(phi) * self.cos_lat * np.cos(dlon),
        )
        den = math.sin(phi) * self.sin_lat + math.cos(phi) * self.cos_lat * np.cos(dlon)
        return float(np.mean(np.arctan2(num, den))) * EARTH_RADIUS_M


def spherical_centroid(points: list[GeoPoint]) -> GeoPoint:
    """3D Cartesian mean projected back onto the sphere."""
    x = y = z = 0.0
    for p in points:
        phi = math.radians(p.lat)
        lam = math.radians(p.lon)
        x += math.cos(phi) * math.cos(lam)
        y += math.cos(phi) * math.sin(lam)
        z += math.sin(phi)
    norm = math.sqrt(x * x + y * y + z * z)
    if norm < 1e-12:
        return points[0]
    return GeoPoint(math.degrees(math.asin(z / norm)), math.degrees(math.atan2(y, x)))


def _grid_offsets(center: GeoPoint, eps_m: float, extent: int) -> list[GeoPoint]:
    dlat_deg = math.degrees(eps_m / EARTH_RADIUS_M)
    cos_lat = math.cos(math.radians(center.lat))
    dlon_deg = math.degrees(eps_m / (EARTH_RADIUS_M * max(cos_lat, 1e-6)))
    offsets = []
    steps = range(-extent, extent + 1)
    for i in steps:
        for j in steps:
            if i == 0 and j == 0:
                continue
            lat = center.lat + i * dlat_deg
            if not -90.0 <= lat <= 90.0:
                continue
            offsets.append(GeoPoint(lat, center.lon + j * dlon_deg))
    return offsets


def grid_center(points: list[GeoPoint], cfg: GridSearchConfig | None = None,
                seed: GeoPoint | None = None) -> GeoPoint:
    """Point minimizing the mean great-circle distance to the cloud, found by
    local grid search with spacing halved whenever no grid point improves.

    Ties between equally good grid points break north-most, then west-most,
    so the search is deterministic.
    """
    if not points:
        raise EstimationError("cannot center an empty point cloud")
    cfg = cfg or GridSearchConfig()
    cloud = _Cloud(points)
    best = seed if seed is not None else spherical_centroid(points)
    best_obj = cloud.mean_distance_m(best)

    eps = cfg.eps0_m
    while eps >= cfg.eps_min_m:
        candidates = _grid_offsets(best, eps, cfg.extent)
        winner = None
        winner_key = None
        for cand in candidates:
            obj = cloud.mean_distance_m(cand)
            key = (obj, -cand.lat, cand.lon)
            if winner_key is None or key < winner_key:
                winner_key = key
                winner = cand
        if winner is not None and winner_key[0] < best_obj:
            best = winner
            best_obj = winner_key[0]
        else:
            eps /= 2.0
    return best


def filter_outliers(points: list[CandidatePoint], cfg: FilterConfig | None = None,
                    grid_cfg: GridSearchConfig | None = None,
                    ) -> tuple[list[CandidatePoint], list[CandidatePoint]]:
    """Repeatedly center the cloud and drop the farthest candidates.

    Each round drops ceil(drop_fraction * kept) points, never going below 3
    kept points. Returns (kept, dropped) with kept in original input order.
    """
    if not points:
        raise EstimationError("cannot filter an empty point cloud")
    cfg = cfg or FilterConfig()
    kept = list(points)
    dropped: list[CandidatePoint] = []
    for _ in range(cfg.rounds):
        if len(kept) <= 3:
            break
        center = grid_center([c.point for c in kept], grid_cfg)
        cloud = _Cloud([center])
        n_drop = math.ceil(cfg.drop_fraction * len(kept))
        n_drop = min(n_drop, len(kept) - 3)
        if n_drop <= 0:
            break
        # Farthest first; index tie-break keeps the drop order deterministic.
        ranked = sorted(
            range(len(kept)),
            key=lambda i: (-cloud.mean_distance_m(kept[i].point), i),
        )
        drop_idx = set(ranked[:n_drop])
        dropped.extend(kept[i] for i in sorted(drop_idx))
        kept = [c for i, c in enumerate(kept) if i not in drop_idx]
    return kept, dropped


def estimate_target(circles: list[LandmarkCircle],
                    grid_cfg: GridSearchConfig | None = None,
                    filter_cfg: FilterConfig | None = None,
                    gap_max_km: float = DEFAULT_GAP_MAX_KM) -> EstimatedLocation:
    """Full estimation pipeline: pairwise candidates, outlier filter, grid center."""
    if len(circles) < 2:
        raise EstimationError(f"need at least 2 circles, got {len(circles)}")
    grid_cfg = grid_cfg or GridSearchConfig()
    candidates = all_candidates(circles, gap_max_km=gap_max_km)
    if not candidates:
        raise EstimationError("every landmark pair was dropped; no candidate points")
    kept, dropped = filter_outliers(candidates, filter_cfg, grid_cfg)
    point = grid_center([c.point for c in kept], grid_cfg)
    cloud = _Cloud([c.point for c in kept])
    return EstimatedLocation(
        point=point,
        kept_points=tuple(kept),
        dropped_points=tuple(dropped),
        mean_residual_km=cloud.mean_distance_m(point) / 1000.0,
    )
