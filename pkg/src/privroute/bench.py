"""Single-segment timing and traffic benchmark.

Each trial draws one random segment per party, runs a complete session and
records wall time and the bytes both parties wrote. Key generation happens
once per run and is reported on its own.
"""
from __future__ import annotations

import json
import random
import secrets
import socket
import statistics
import time
from dataclasses import asdict, dataclass, field

from .geometry import Point, Segment, intersect_plain
from .paillier import keygen
from .session import BobSession, run_alice, run_loopback
from .wire import CountedChannel

# Reference row from the published evaluation, and the garbled-circuit baseline.
REFERENCE_TIME_S = 4.407
REFERENCE_BYTES = 4634
BASELINE_TIME_S = 6.092
BASELINE_BYTES = 39221


@dataclass(frozen=True)
class BenchConfig:
    trials: int = 30
    coord_min: int = -99
    coord_max: int = 99
    key_bits: int = 2048
    seed: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.coord_min > self.coord_max:
            raise ValueError("empty coordinate range")
        if max(abs(self.coord_min), abs(self.coord_max)) >= 1 << 32:
            raise ValueError("coordinate range exceeds the 32-bit bound")


@dataclass
class TrialRecord:
    trial: int
    alice_segment: list
    bob_segment: list
    collision: bool | None
    expected: bool
    setup_s: float
    compare_s: float
    wall_time_s: float
    bytes_alice: int
    bytes_bob: int
    bytes_total: int
    mult_calls: int
    sign_calls: int


@dataclass
class Metrics:
    key_bits: int
    seed: int
    keygen_s: float
    trials: list[TrialRecord] = field(default_factory=list)

    @property
    def mean_wall_time_s(self) -> float:
        return statistics.fmean(t.wall_time_s for t in self.trials)

    @property
    def mean_bytes_total(self) -> float:
        return statistics.fmean(t.bytes_total for t in self.trials)

    @property
    def mean_setup_s(self) -> float:
        return statistics.fmean(t.setup_s for t in self.trials)

    @property
    def mean_compare_s(self) -> float:
        return statistics.fmean(t.compare_s for t in self.trials)

    def to_dict(self) -> dict:
        return {
            "key_bits": self.key_bits,
            "seed": self.seed,
            "keygen_s": self.keygen_s,
            "trials": [asdict(t) for t in self.trials],
            "mean_wall_time_s": self.mean_wall_time_s,
            "mean_setup_s": self.mean_setup_s,
            "mean_compare_s": self.mean_compare_s,
            "mean_bytes_total": self.mean_bytes_total,
            "reference": {
                "published": {"time_s": REFERENCE_TIME_S, "bytes": REFERENCE_BYTES},
                "garbled_circuit_baseline": {"time_s": BASELINE_TIME_S, "bytes": BASELINE_BYTES},
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Metrics":
        return cls(d["key_bits"], d["seed"], d["keygen_s"],
                   [TrialRecord(**t) for t in d["trials"]])

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def trial_lines(self):
        for t in self.trials:
            hit = "-" if t.collision is None else int(t.collision)
            yield (f"trial={t.trial} collision={hit} time_s={t.wall_time_s:.4f} "
                   f"setup_s={t.setup_s:.4f} compare_s={t.compare_s:.4f} "
                   f"bytes={t.bytes_total} mult={t.mult_calls} sign={t.sign_calls}")

    def table(self) -> str:
        rows = [
            ("Approach", "Time (seconds)", "Network traffic (bytes)"),
            ("Measured (mean)", f"{self.mean_wall_time_s:.3f}s", f"{self.mean_bytes_total:.0f}"),
            ("Published reference", f"{REFERENCE_TIME_S:.3f}s", f"{REFERENCE_BYTES}"),
            ("Garbled-circuit baseline", f"{BASELINE_TIME_S:.3f}s", f"{BASELINE_BYTES}"),
        ]
        w = [max(len(r[i]) for r in rows) for i in range(3)]
        lines = [" | ".join(c.ljust(w[i]) for i, c in enumerate(r)) for r in rows]
        lines.insert(1, "-+-".join("-" * x for x in w))
        lines.append(f"(setup {self.mean_setup_s:.3f}s + comparison {self.mean_compare_s:.3f}s per trial;"
                     f" key generation {self.keygen_s:.3f}s once, {self.key_bits}-bit key)")
        return "\n".join(lines)


def random_segments(cfg: BenchConfig, seed: int) -> list[tuple[Segment, Segment]]:
    rng = random.Random(seed)
    point = lambda: Point(rng.randint(cfg.coord_min, cfg.coord_max),
                          rng.randint(cfg.coord_min, cfg.coord_max))
    return [(Segment(point(), point()), Segment(point(), point())) for _ in range(cfg.trials)]


def run_bench(cfg: BenchConfig, keypair=None, progress=None) -> Metrics:
    seed = cfg.seed if cfg.seed is not None else secrets.randbits(32)
    t0 = time.perf_counter()
    if keypair is None:
        keypair = keygen(cfg.key_bits)
    keygen_s = time.perf_counter() - t0
    report = Metrics(keypair[0].bits, seed, keygen_s)
    for i, (sa, sb) in enumerate(random_segments(cfg, seed), start=1):
        res = run_loopback(list(sa), list(sb), keypair)
        rec = TrialRecord(
            trial=i,
            alice_segment=[list(p) for p in sa],
            bob_segment=[list(p) for p in sb],
            collision=0 in res.collisions,
            expected=intersect_plain(sa, sb),
            setup_s=res.bob.setup_s + res.alice.setup_s,
            compare_s=res.alice.compare_s,
            wall_time_s=res.bob.setup_s + res.alice.wall_time_s,
            bytes_alice=res.alice.bytes_out,
            bytes_bob=res.bob.bytes_out,
            bytes_total=res.bytes_total,
            mult_calls=res.alice.mult_calls,
            sign_calls=res.alice.sign_calls,
        )
        report.trials.append(rec)
        if progress:
            progress(rec)
    return report


def run_bench_bob(cfg: BenchConfig, listener: socket.socket, keypair=None, progress=None) -> Metrics:
    """Serve one session per trial on ``listener`` (two-host mode).

    Bob never learns the outcome, so ``collision`` stays ``None``.
    """
    if cfg.seed is None:
        raise ValueError("two-host runs need an explicit shared seed")
    t0 = time.perf_counter()
    if keypair is None:
        keypair = keygen(cfg.key_bits)
    report = Metrics(keypair[0].bits, cfg.seed, time.perf_counter() - t0)
    for i, (sa, sb) in enumerate(random_segments(cfg, cfg.seed), start=1):
        session = BobSession(keypair, list(sb))
        session.encrypt_route()
        conn, _ = listener.accept()
        channel = CountedChannel(conn)
        try:
            m = session.run(channel)
        finally:
            channel.close()
        rec = TrialRecord(i, [list(p) for p in sa], [list(p) for p in sb], None,
                          intersect_plain(sa, sb), m.setup_s, m.compare_s, m.wall_time_s,
                          m.bytes_in, m.bytes_out, m.bytes_total, m.mult_calls, m.sign_calls)
        report.trials.append(rec)
        if progress:
            progress(rec)
    return report


def _connect(address: tuple[str, int], timeout: float) -> socket.socket:
    deadline = time.monotonic() + timeout
    while True:
        try:
            return socket.create_connection(address)
        except OSError:
            if time.monotonic() > deadline:
                raise
            time.sleep(0.05)


def run_bench_alice(cfg: BenchConfig, address: tuple[str, int], connect_timeout: float = 30.0,
                    progress=None) -> Metrics:
    if cfg.seed is None:
        raise ValueError("two-host runs need an explicit shared seed")
    report = Metrics(cfg.key_bits, cfg.seed, 0.0)
    for i, (sa, sb) in enumerate(random_segments(cfg, cfg.seed), start=1):
        hits, m = run_alice(_connect(address, connect_timeout), list(sa))
        rec = TrialRecord(i, [list(p) for p in sa], [list(p) for p in sb], 0 in hits,
                          intersect_plain(sa, sb), m.setup_s, m.compare_s, m.wall_time_s,
                          m.bytes_out, m.bytes_in, m.bytes_total, m.mult_calls, m.sign_calls)
        report.trials.append(rec)
        if progress:
            progress(rec)
    return report
