"""Alice and Bob session roles.

Bob encrypts his route, waits for Alice, sends ``PUBKEY`` and ``ENC_ROUTE``
and then only answers blinded requests until ``DONE``. Alice drives the
comparison and is the only party that learns which of her segments collide.
"""
from __future__ import annotations

import enum
import socket
import threading
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import paillier as he
from .geometry import EncPoint, Point, check_coord, compare_paths
from .paillier import PrivateKey, PublicKey
from .subprotocols import T_MAX, ProtocolCtx, serve
from .wire import (
    CountedChannel,
    Tag,
    deserialize_enc_path,
    deserialize_pubkey,
    serialize_enc_path,
    serialize_pubkey,
)


@dataclass
class SessionMetrics:
    role: str
    wall_time_s: float = 0.0
    setup_s: float = 0.0
    compare_s: float = 0.0
    bytes_out: int = 0
    bytes_in: int = 0
    mult_calls: int = 0
    sign_calls: int = 0

    @property
    def bytes_total(self) -> int:
        # in == peer's out, so this is what both parties wrote
        return self.bytes_out + self.bytes_in

    def as_dict(self) -> dict:
        d = asdict(self)
        d["bytes_total"] = self.bytes_total
        return d


def as_path(points) -> list[Point]:
    path = [Point(check_coord(x), check_coord(y)) for x, y in points]
    if not path:
        raise ValueError("a path needs at least one point")
    return path


class BobState(enum.Enum):
    AWAIT_CONNECT = "await-connect"
    SENT_ROUTE = "sent-route"
    SERVING = "serving"
    DONE = "done"


class BobSession:
    def __init__(self, keypair: tuple[PublicKey, PrivateKey], path, t_max: int = T_MAX, rng=None):
        self.pk, self.sk = keypair
        self.path = as_path(path)
        self.t_max = t_max
        self.rng = rng
        self.state = BobState.AWAIT_CONNECT
        self.encrypt_s = 0.0
        self._enc_route: list[EncPoint] | None = None

    def encrypt_route(self) -> list[EncPoint]:
        if self._enc_route is None:
            t0 = time.perf_counter()
            enc = lambda v: self.sk.encrypt(he.encode(self.pk, v), self.rng)
            self._enc_route = [EncPoint(enc(p.x), enc(p.y)) for p in self.path]
            self.encrypt_s = time.perf_counter() - t0
        return self._enc_route

    def run(self, channel: CountedChannel) -> SessionMetrics:
        route = self.encrypt_route()
        t0 = time.perf_counter()
        channel.send_frame(Tag.PUBKEY, serialize_pubkey(self.pk))
        channel.send_frame(Tag.ENC_ROUTE, serialize_enc_path(self.pk, route))
        self.state = BobState.SENT_ROUTE
        ctx = ProtocolCtx(self.pk, channel, t_max=self.t_max, rng=self.rng)
        self.state = BobState.SERVING
        serve(ctx, self.sk)
        self.state = BobState.DONE
        self.zero_events = ctx.zero_events
        return SessionMetrics(
            role="bob",
            wall_time_s=time.perf_counter() - t0 + self.encrypt_s,
            setup_s=self.encrypt_s,
            compare_s=time.perf_counter() - t0,
            bytes_out=channel.bytes_out,
            bytes_in=channel.bytes_in,
            mult_calls=ctx.mult_calls,
            sign_calls=ctx.sign_calls,
        )


class AliceSession:
    def __init__(self, path, t_max: int = T_MAX, rng=None, blinds_seen: set | None = None):
        self.path = as_path(path)
        self.t_max = t_max
        self.rng = rng
        self.blinds_seen = blinds_seen
        self.peer_pk: PublicKey | None = None
        self.peer_route: list[EncPoint] | None = None
        self.collisions: set[int] | None = None

    def run(self, channel: CountedChannel) -> tuple[set[int], SessionMetrics]:
        t0 = time.perf_counter()
        self.peer_pk = deserialize_pubkey(channel.expect(Tag.PUBKEY).payload)
        raw = deserialize_enc_path(self.peer_pk, channel.expect(Tag.ENC_ROUTE).payload)
        self.peer_route = [EncPoint(x, y) for x, y in raw]
        t1 = time.perf_counter()
        ctx = ProtocolCtx(self.peer_pk, channel, t_max=self.t_max, rng=self.rng,
                          blinds_seen=self.blinds_seen)
        self.collisions = compare_paths(ctx, self.path, self.peer_route)
        channel.send_frame(Tag.DONE)
        t2 = time.perf_counter()
        return self.collisions, SessionMetrics(
            role="alice",
            wall_time_s=t2 - t0,
            setup_s=t1 - t0,
            compare_s=t2 - t1,
            bytes_out=channel.bytes_out,
            bytes_in=channel.bytes_in,
            mult_calls=ctx.mult_calls,
            sign_calls=ctx.sign_calls,
        )


def run_bob(listener: socket.socket, keypair, path, t_max: int = T_MAX, rng=None) -> SessionMetrics:
    """Encrypt the route, accept one connection on ``listener`` and serve it."""
    session = BobSession(keypair, path, t_max, rng)
    session.encrypt_route()
    conn, _ = listener.accept()
    channel = CountedChannel(conn)
    try:
        return session.run(channel)
    finally:
        channel.close()


def run_alice(connection: socket.socket, path, t_max: int = T_MAX, rng=None) -> tuple[set[int], SessionMetrics]:
    channel = CountedChannel(connection)
    try:
        return AliceSession(path, t_max, rng).run(channel)
    finally:
        channel.close()


@dataclass
class LoopbackResult:
    collisions: set[int]
    alice: SessionMetrics
    bob: SessionMetrics
    alice_transcript: list = field(default_factory=list)
    bob_transcript: list = field(default_factory=list)
    bob_zero_events: int = 0

    @property
    def bytes_total(self) -> int:
        return self.alice.bytes_out + self.bob.bytes_out


def run_loopback(alice_path: Sequence, bob_path: Sequence, keypair, *, t_max: int = T_MAX,
                 rng=None, record: bool = False, blinds_seen: set | None = None) -> LoopbackResult:
    """Run one full session in-process over a socket pair, Bob on a thread."""
    bob = BobSession(keypair, bob_path, t_max, rng)
    bob.encrypt_route()
    alice = AliceSession(alice_path, t_max, rng, blinds_seen)
    a_sock, b_sock = socket.socketpair()
    a_ch, b_ch = CountedChannel(a_sock, record), CountedChannel(b_sock, record)
    box: dict = {}

    def bob_main():
        try:
            box["metrics"] = bob.run(b_ch)
        except BaseException as exc:  # surfaced on the caller's thread
            box["error"] = exc
            b_ch.close()

    worker = threading.Thread(target=bob_main, name="bob", daemon=True)
    worker.start()
    try:
        hits, a_metrics = alice.run(a_ch)
    except BaseException:
        a_ch.close()
        worker.join(timeout=5)
        if "error" in box:
            raise box["error"]
        raise
    worker.join()
    a_ch.close()
    b_ch.close()
    if "error" in box:
        raise box["error"]
    return LoopbackResult(
        collisions=hits,
        alice=a_metrics,
        bob=box["metrics"],
        alice_transcript=a_ch.transcript or [],
        bob_transcript=b_ch.transcript or [],
        bob_zero_events=bob.zero_events,
    )


@dataclass
class LoopbackPair:
    alice: ProtocolCtx
    bob: ProtocolCtx


@contextmanager
def loopback_pair(keypair, *, t_max: int = T_MAX, rng=None, record: bool = False,
                  blinds_seen: set | None = None):
    """Alice-side protocol context with Bob answering on a thread.

    For driving subprotocols directly; the route exchange is skipped.
    """
    pk, sk = keypair
    a_sock, b_sock = socket.socketpair()
    pair = LoopbackPair(
        ProtocolCtx(pk, CountedChannel(a_sock, record), t_max=t_max, rng=rng, blinds_seen=blinds_seen),
        ProtocolCtx(pk, CountedChannel(b_sock, record), t_max=t_max, rng=rng),
    )
    box: dict = {}

    def bob_main():
        try:
            serve(pair.bob, sk)
        except BaseException as exc:
            box["error"] = exc
            pair.bob.channel.close()

    worker = threading.Thread(target=bob_main, name="bob", daemon=True)
    worker.start()
    finished = False
    try:
        yield pair
        pair.alice.channel.send_frame(Tag.DONE)
        finished = True
    finally:
        if not finished:
            # unblock Bob's read so the thread can exit
            pair.alice.channel.close()
        worker.join()
        pair.alice.channel.close()
        pair.bob.channel.close()
    if "error" in box:
        raise box["error"]
