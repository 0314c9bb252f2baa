"""Cost of the raster-probe attack on a peer's route.

A curious Alice can replace her route with a serpentine of short horizontal
segments covering an area, one line per band, and read Bob's route off the
segments that report a collision. This module generates that raster, runs
it against Bob through the real protocol and reports what it cost.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

from .geometry import Point
from .paillier import keygen
from .session import run_loopback
from .subprotocols import T_MAX


@dataclass(frozen=True)
class ProbeConfig:
    x_min: int
    y_min: int
    x_max: int
    y_max: int
    spacing: int
    segment_length: int
    key_bits: int = 1024

    def __post_init__(self):
        if self.x_max <= self.x_min or self.y_max < self.y_min:
            raise ValueError("empty probe area")
        if self.spacing < 1 or self.segment_length < 1:
            raise ValueError("spacing and segment_length must be positive integers")

    @property
    def bands(self) -> int:
        return max(1, math.ceil((self.y_max - self.y_min) / self.spacing))

    @property
    def columns(self) -> int:
        return max(1, math.ceil((self.x_max - self.x_min) / self.segment_length))


def raster_path(cfg: ProbeConfig) -> tuple[list[Point], list[tuple[int, int | None]]]:
    """Serpentine probe path and, per segment, its ``(band, column)`` cell.

    Connector segments between lines carry ``column=None``.
    """
    xs = [min(cfg.x_min + c * cfg.segment_length, cfg.x_max) for c in range(cfg.columns + 1)]
    points: list[Point] = []
    cells: list[tuple[int, int | None]] = []
    for band in range(cfg.bands):
        y = cfg.y_min + band * cfg.spacing
        row = xs if band % 2 == 0 else xs[::-1]
        if points:
            cells.append((band, None))
        for k, x in enumerate(row):
            points.append(Point(x, y))
            if k:
                col = k - 1 if band % 2 == 0 else cfg.columns - k
                cells.append((band, col))
    return points, cells


@dataclass
class ProbeReport:
    probe_segments: int
    bob_segments: int
    bands: int
    mult_calls: int
    sign_calls: int
    bytes_total: int
    wall_time_s: float
    cells_hit: list[tuple[int, int]] = field(default_factory=list)
    extrapolated_hours_1km2: float = 0.0

    @property
    def pairs(self) -> int:
        return self.probe_segments * self.bob_segments

    @property
    def subprotocol_calls(self) -> int:
        return self.mult_calls + self.sign_calls

    @property
    def seconds_per_pair(self) -> float:
        return self.wall_time_s / max(1, self.pairs)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(pairs=self.pairs, subprotocol_calls=self.subprotocol_calls,
                 seconds_per_pair=self.seconds_per_pair)
        return d


def attack_hours(seconds_per_pair: float, bob_segments: int, side_m: int = 1000,
                 spacing_m: int = 1, segment_m: int = 1) -> float:
    """Extrapolated duration of a raster over a ``side_m`` square."""
    lines = side_m // spacing_m
    per_line = side_m // segment_m
    segments = lines * per_line + (lines - 1)
    return segments * bob_segments * seconds_per_pair / 3600


def brute_force_probe(cfg: ProbeConfig, bob_path, keypair=None, rng=None,
                      t_max: int = T_MAX) -> ProbeReport:
    if keypair is None:
        keypair = keygen(cfg.key_bits, rng)
    path, cells = raster_path(cfg)
    t0 = time.perf_counter()
    result = run_loopback(path, bob_path, keypair, t_max=t_max, rng=rng)
    elapsed = time.perf_counter() - t0
    hit = sorted({cells[i] for i in result.collisions if cells[i][1] is not None})
    bob_segments = max(0, len(bob_path) - 1)
    report = ProbeReport(
        probe_segments=len(cells),
        bob_segments=bob_segments,
        bands=cfg.bands,
        mult_calls=result.alice.mult_calls,
        sign_calls=result.alice.sign_calls,
        bytes_total=result.bytes_total,
        wall_time_s=elapsed,
        cells_hit=hit,
    )
    report.extrapolated_hours_1km2 = attack_hours(report.seconds_per_pair, bob_segments)
    return report
