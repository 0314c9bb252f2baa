"""Discrete-time flight simulation with encrypted deconfliction.

Drones fly their polylines at constant speed. When two of them come within
``initiation_range`` for the first time, the one with the smaller id plays
Alice, runs a full encrypted session against the other and then flies every
colliding segment at ``default_altitude + avoid_delta``. Bob never changes
altitude. Sessions are strictly pairwise.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .geometry import Point
from .paillier import keygen
from .session import as_path, run_loopback
from .subprotocols import T_MAX


@dataclass(frozen=True)
class FlightConfig:
    initiation_range: float = 10.0
    default_altitude: float = 100.0
    avoid_delta: float = 10.0
    # largest distance any drone covers in one tick
    resolution: float = 0.01
    key_bits: int = 1024
    t_max: int = T_MAX

    def __post_init__(self):
        if self.avoid_delta <= 0:
            raise ValueError("avoid_delta must be positive")
        if self.initiation_range <= 0 or self.resolution <= 0:
            raise ValueError("initiation_range and resolution must be positive")


@dataclass(frozen=True)
class Drone:
    id: str
    path: Sequence[Point]
    speed: float


@dataclass(frozen=True)
class TraceRecord:
    tick: int
    drone: str
    x: float
    y: float
    altitude: float
    event: str = ""


@dataclass
class TraceLog:
    dt: float
    records: list[TraceRecord] = field(default_factory=list)
    encounters: list[dict] = field(default_factory=list)

    def lines(self) -> Iterable[str]:
        for r in self.records:
            yield json.dumps(asdict(r))

    def write(self, fh) -> None:
        for line in self.lines():
            fh.write(line + "\n")


class _Flyer:
    def __init__(self, drone: Drone):
        self.id = drone.id
        self.path = as_path(drone.path)
        if drone.speed <= 0:
            raise ValueError(f"drone {drone.id}: speed must be positive")
        self.speed = drone.speed
        self.cum = [0.0]
        for a, b in zip(self.path, self.path[1:]):
            self.cum.append(self.cum[-1] + math.hypot(b.x - a.x, b.y - a.y))
        self.length = self.cum[-1]
        self.s = 0.0
        self.raised: set[int] = set()
        self.keypair = None
        self.altitude = None

    @property
    def segment(self) -> int:
        if len(self.path) < 2:
            return 0
        return min(bisect.bisect_right(self.cum, self.s) - 1, len(self.path) - 2)

    def position(self) -> tuple[float, float]:
        if len(self.path) < 2:
            return float(self.path[0].x), float(self.path[0].y)
        i = self.segment
        seg_len = self.cum[i + 1] - self.cum[i]
        t = 0.0 if seg_len == 0 else (self.s - self.cum[i]) / seg_len
        a, b = self.path[i], self.path[i + 1]
        return a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)


def flight_sim(drones: Sequence[Drone], cfg: FlightConfig = FlightConfig(), rng=None,
               log_every: int = 1) -> TraceLog:
    """Simulate until every drone has reached the end of its path.

    ``log_every`` thins the per-tick position records; event records
    (protocol runs, altitude changes, arrivals) are always kept.
    """
    flyers = [_Flyer(d) for d in drones]
    if len({f.id for f in flyers}) != len(flyers):
        raise ValueError("drone ids must be unique")
    max_speed = max(f.speed for f in flyers)
    # never move more than half the trigger range (or the resolution) per tick
    dt = min(cfg.resolution, cfg.initiation_range / 2) / max_speed
    log = TraceLog(dt=dt)
    met: set[tuple[str, str]] = set()
    active = list(flyers)
    tick = 0
    while active:
        pos = {f.id: f.position() for f in active}

        for i, f in enumerate(active):
            for g in active[i + 1:]:
                alice, bob = sorted((f, g), key=lambda d: d.id)
                key = (alice.id, bob.id)
                if key in met or math.dist(pos[f.id], pos[g.id]) > cfg.initiation_range:
                    continue
                met.add(key)
                if bob.keypair is None:
                    bob.keypair = keygen(cfg.key_bits, rng)
                result = run_loopback(alice.path, bob.path, bob.keypair, t_max=cfg.t_max, rng=rng)
                alice.raised |= result.collisions
                log.encounters.append({
                    "tick": tick, "alice": alice.id, "bob": bob.id,
                    "collisions": sorted(result.collisions),
                    "bytes_total": result.bytes_total,
                })
                x, y = pos[alice.id]
                log.records.append(TraceRecord(tick, alice.id, x, y, _altitude(alice, cfg),
                                               f"protocol:bob={bob.id}:segments={sorted(result.collisions)}"))

        for f in active:
            alt = _altitude(f, cfg)
            event = ""
            if f.altitude is not None and alt != f.altitude:
                event = "climb" if alt > f.altitude else "descend"
            f.altitude = alt
            if event or tick % log_every == 0:
                x, y = pos[f.id]
                log.records.append(TraceRecord(tick, f.id, x, y, alt, event))

        still = []
        for f in active:
            if f.s >= f.length:
                x, y = pos[f.id]
                log.records.append(TraceRecord(tick, f.id, x, y, cfg.default_altitude, "arrived"))
            else:
                f.s = min(f.s + f.speed * dt, f.length)
                still.append(f)
        active = still
        tick += 1
    return log


def _altitude(f: _Flyer, cfg: FlightConfig) -> float:
    if f.segment in f.raised:
        return cfg.default_altitude + cfg.avoid_delta
    return cfg.default_altitude


def find_violations(log: TraceLog, cfg: FlightConfig) -> list[dict]:
    """Audit a full-resolution trace for deconfliction failures.

    A coincidence is two drones within ``cfg.resolution`` of each other at
    the same tick; each one must show exactly ``avoid_delta`` of altitude
    separation. Every drone's last record must be at default altitude.
    """
    by_tick: dict[int, dict[str, TraceRecord]] = {}
    last: dict[str, TraceRecord] = {}
    for r in log.records:
        if r.event.startswith("protocol"):
            continue
        last[r.drone] = r
        if r.event != "arrived":
            by_tick.setdefault(r.tick, {})[r.drone] = r

    bad = []
    for tick, recs in by_tick.items():
        ids = sorted(recs)
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                ra, rb = recs[a], recs[b]
                if math.dist((ra.x, ra.y), (rb.x, rb.y)) <= cfg.resolution:
                    if not math.isclose(abs(ra.altitude - rb.altitude), cfg.avoid_delta):
                        bad.append({"tick": tick, "drones": (a, b),
                                    "separation": abs(ra.altitude - rb.altitude)})
    for drone, r in last.items():
        if r.altitude != cfg.default_altitude:
            bad.append({"tick": r.tick, "drones": (drone,), "final_altitude": r.altitude})
    return bad


def coincidences(log: TraceLog, cfg: FlightConfig) -> int:
    """Number of (tick, pair) coincidences in a full-resolution trace."""
    by_tick: dict[int, list[TraceRecord]] = {}
    for r in log.records:
        if not r.event.startswith("protocol") and r.event != "arrived":
            by_tick.setdefault(r.tick, []).append(r)
    count = 0
    for recs in by_tick.values():
        for i, a in enumerate(recs):
            for b in recs[i + 1:]:
                if a.drone != b.drone and math.dist((a.x, a.y), (b.x, b.y)) <= cfg.resolution:
                    count += 1
    return count
