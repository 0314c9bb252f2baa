"""Two-party primitives over a counted channel.

The requester (Alice) only ever holds ciphertexts under the responder's key;
the responder (Bob) holds the private key and answers one request per round.

Leakage, honest-but-curious:

* Bob sees ``x + a`` and ``y + b`` for uniform ``a, b`` in multiplication
  rounds, and ``s * (+-1) * d`` for sign rounds. He learns whether ``d == 0``
  (counted in ``ProtocolCtx.zero_events``), never its sign.
* Alice learns every sign she asks for.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import paillier as he
from .paillier import Ciphertext, PrivateKey, PublicKey
from .wire import (
    CountedChannel,
    ProtocolError,
    Tag,
    deserialize_ciphertexts,
    deserialize_sign,
    serialize_ciphertexts,
    serialize_sign,
)

KAPPA = 40
T_MAX = 72


@dataclass(frozen=True)
class MultBlinding:
    a: int
    b: int


@dataclass(frozen=True)
class SignBlinding:
    s: int
    flip: int


@dataclass
class ProtocolCtx:
    """Per-session state shared by both roles.

    ``blinds_seen`` is a test hook: when set to a set, every blinding value
    drawn is checked for freshness and recorded.
    """

    pk: PublicKey
    channel: CountedChannel
    t_max: int = T_MAX
    kappa: int = KAPPA
    rng: object = None
    mult_calls: int = 0
    sign_calls: int = 0
    zero_events: int = 0
    blinds_seen: set | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.t_max + self.kappa + 2 >= self.pk.bits:
            raise ValueError(
                f"t_max={self.t_max} and kappa={self.kappa} overflow a {self.pk.bits}-bit modulus"
            )

    @property
    def rand(self):
        return self.rng or he._SYSTEM_RNG

    def _remember(self, *values) -> None:
        if self.blinds_seen is None:
            return
        for v in values:
            if v in self.blinds_seen:
                raise AssertionError(f"blinding value reused: {v!r}")
            self.blinds_seen.add(v)


def _operand(ctx: ProtocolCtx, v) -> Ciphertext:
    if isinstance(v, Ciphertext):
        return v
    return he.trivial(ctx.pk, v)


def secure_mult(ctx: ProtocolCtx, cx: Ciphertext, cy: Ciphertext) -> Ciphertext:
    """Return an encryption of ``x * y`` with one round trip to the key holder.

    Uses ``xy = (x+a)(y+b) - bx - ay - ab`` with fresh uniform blinds.
    """
    pk, rng = ctx.pk, ctx.rand
    blind = MultBlinding(rng.randrange(int(pk.n)), rng.randrange(int(pk.n)))
    ctx._remember(("mul", blind.a), ("mul", blind.b))

    xa = he.rerandomize(pk, he.add_plain(pk, cx, blind.a), rng)
    yb = he.rerandomize(pk, he.add_plain(pk, cy, blind.b), rng)
    ctx.channel.send_frame(Tag.MUL_REQ, serialize_ciphertexts(pk, xa, yb))
    (prod,) = deserialize_ciphertexts(pk, ctx.channel.expect(Tag.MUL_RESP).payload, 1)
    ctx.mult_calls += 1

    out = he.add(pk, prod, he.scalar_mul(pk, cx, -blind.b))
    out = he.add(pk, out, he.scalar_mul(pk, cy, -blind.a))
    return he.add_plain(pk, out, -blind.a * blind.b)


def secure_sign(ctx: ProtocolCtx, cd: Ciphertext) -> int:
    """Return the sign of the encrypted value: -1, 0 or +1.

    The value is multiplied by a random ``s`` in ``[1, 2**kappa]`` and a random
    sign before Bob sees it, so his answer is unbiased noise to him.
    """
    pk, rng = ctx.pk, ctx.rand
    blind = SignBlinding(1 + rng.randrange(1 << ctx.kappa), rng.getrandbits(1))
    ctx._remember(("sign", blind.s, blind.flip))

    k = -blind.s if blind.flip else blind.s
    blinded = he.rerandomize(pk, he.scalar_mul(pk, cd, k), rng)
    ctx.channel.send_frame(Tag.SIGN_REQ, serialize_ciphertexts(pk, blinded))
    answer = deserialize_sign(ctx.channel.expect(Tag.SIGN_RESP).payload)
    ctx.sign_calls += 1
    return -answer if blind.flip else answer


def secure_leq(ctx: ProtocolCtx, x, y) -> bool:
    """``x <= y`` where either operand may be a plain integer."""
    if not isinstance(x, Ciphertext) and not isinstance(y, Ciphertext):
        raise TypeError("at least one operand must be encrypted")
    diff = he.sub(ctx.pk, _operand(ctx, x), _operand(ctx, y))
    return secure_sign(ctx, diff) <= 0


def secure_equal(ctx: ProtocolCtx, x, y) -> bool:
    if not isinstance(x, Ciphertext) and not isinstance(y, Ciphertext):
        raise TypeError("at least one operand must be encrypted")
    diff = he.sub(ctx.pk, _operand(ctx, x), _operand(ctx, y))
    return secure_sign(ctx, diff) == 0


def respond(ctx: ProtocolCtx, sk: PrivateKey, frame) -> None:
    """Answer a single MUL_REQ or SIGN_REQ frame."""
    pk = ctx.pk
    if frame.tag == Tag.MUL_REQ:
        u, v = (he.decrypt(sk, c) for c in deserialize_ciphertexts(pk, frame.payload, 2))
        reply = sk.encrypt(u * v % pk.n, ctx.rng)
        ctx.channel.send_frame(Tag.MUL_RESP, serialize_ciphertexts(pk, reply))
        ctx.mult_calls += 1
    elif frame.tag == Tag.SIGN_REQ:
        (c,) = deserialize_ciphertexts(pk, frame.payload, 1)
        v = he.decrypt_signed(sk, c)
        if abs(v) >= 1 << (ctx.t_max + ctx.kappa):
            raise ProtocolError("blinded operand exceeds the agreed bit bound")
        if v == 0:
            ctx.zero_events += 1
        ctx.channel.send_frame(Tag.SIGN_RESP, serialize_sign((v > 0) - (v < 0)))
        ctx.sign_calls += 1
    else:
        raise ProtocolError(f"responder cannot handle {frame.tag.name}")


def mult_responder(ctx: ProtocolCtx, sk: PrivateKey) -> None:
    respond(ctx, sk, ctx.channel.expect(Tag.MUL_REQ))


def sign_responder(ctx: ProtocolCtx, sk: PrivateKey) -> None:
    respond(ctx, sk, ctx.channel.expect(Tag.SIGN_REQ))


def serve(ctx: ProtocolCtx, sk: PrivateKey) -> None:
    """Answer requests until the peer sends DONE."""
    while True:
        frame = ctx.channel.expect(Tag.MUL_REQ, Tag.SIGN_REQ, Tag.DONE)
        if frame.tag == Tag.DONE:
            return
        respond(ctx, sk, frame)
