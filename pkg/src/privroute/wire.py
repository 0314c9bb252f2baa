"""Length-prefixed binary framing with byte accounting.

Frame layout::

    +----------------+-----+-----------------+
    | length (4, BE) | tag | payload[length] |
    +----------------+-----+-----------------+

Big integers are a 4-byte big-endian length followed by the big-endian
magnitude. Ciphertexts always use the full byte width of ``n**2`` so that
message sizes only depend on the key size.
"""
from __future__ import annotations

import socket
import struct
from dataclasses import dataclass
from enum import IntEnum

from gmpy2 import mpz

from .paillier import Ciphertext, PublicKey

HEADER = struct.Struct(">IB")
MAX_FRAME = 1 << 20


class Tag(IntEnum):
    PUBKEY = 0x01
    ENC_ROUTE = 0x02
    MUL_REQ = 0x10
    MUL_RESP = 0x11
    SIGN_REQ = 0x20
    SIGN_RESP = 0x21
    DONE = 0x7F


class ProtocolError(Exception):
    """Malformed, unexpected or oversized traffic from the peer."""


class ChannelClosed(ProtocolError):
    pass


@dataclass(frozen=True)
class Frame:
    tag: Tag
    payload: bytes

    @property
    def length(self) -> int:
        return len(self.payload)


class CountedChannel:
    """Frame transport over a connected stream socket.

    ``bytes_out`` / ``bytes_in`` count every byte written to / read from the
    stream, headers included. With ``record=True`` the channel also keeps a
    transcript of ``(direction, tag, size)`` tuples for auditing.
    """

    def __init__(self, sock: socket.socket, record: bool = False):
        self.sock = sock
        self.bytes_out = 0
        self.bytes_in = 0
        self.transcript: list[tuple[str, Tag, int]] | None = [] if record else None

    def send_frame(self, tag: Tag, payload: bytes = b"") -> None:
        if len(payload) > MAX_FRAME:
            raise ProtocolError(f"frame of {len(payload)} bytes exceeds the 1 MiB cap")
        data = HEADER.pack(len(payload), int(tag)) + payload
        self.sock.sendall(data)
        self.bytes_out += len(data)
        if self.transcript is not None:
            self.transcript.append(("out", Tag(tag), len(data)))

    def recv_frame(self) -> Frame:
        length, raw_tag = HEADER.unpack(self._read_exact(HEADER.size))
        if length > MAX_FRAME:
            raise ProtocolError(f"peer announced a {length}-byte frame (cap is 1 MiB)")
        try:
            tag = Tag(raw_tag)
        except ValueError:
            raise ProtocolError(f"unknown message tag 0x{raw_tag:02x}") from None
        payload = self._read_exact(length)
        self.bytes_in += HEADER.size + length
        if self.transcript is not None:
            self.transcript.append(("in", tag, HEADER.size + length))
        return Frame(tag, payload)

    def expect(self, *tags: Tag) -> Frame:
        frame = self.recv_frame()
        if frame.tag not in tags:
            wanted = "/".join(t.name for t in tags)
            raise ProtocolError(f"expected {wanted}, got {frame.tag.name}")
        return frame

    def _read_exact(self, size: int) -> bytes:
        buf = bytearray(size)
        view = memoryview(buf)
        got = 0
        while got < size:
            k = self.sock.recv_into(view[got:])
            if k == 0:
                raise ChannelClosed("stream closed by peer")
            got += k
        return bytes(buf)

    def close(self) -> None:
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


def pack_int(x) -> bytes:
    x = int(x)
    if x < 0:
        raise ValueError("only non-negative integers go on the wire")
    body = x.to_bytes((x.bit_length() + 7) // 8, "big")
    return struct.pack(">I", len(body)) + body


def unpack_int(data: bytes, offset: int = 0) -> tuple[int, int]:
    if offset + 4 > len(data):
        raise ProtocolError("truncated integer header")
    (size,) = struct.unpack_from(">I", data, offset)
    offset += 4
    if offset + size > len(data):
        raise ProtocolError("truncated integer body")
    return int.from_bytes(data[offset:offset + size], "big"), offset + size


def serialize_pubkey(pk: PublicKey) -> bytes:
    return pack_int(pk.n)


def deserialize_pubkey(data: bytes) -> PublicKey:
    n, end = unpack_int(data)
    if end != len(data):
        raise ProtocolError("trailing bytes after public key")
    if n < 3 or n % 2 == 0:
        raise ProtocolError("implausible public modulus")
    return PublicKey(mpz(n))


def serialize_ciphertext(pk: PublicKey, c: Ciphertext) -> bytes:
    if c.key_id != pk.key_id:
        raise ValueError("ciphertext is bound to a different public key")
    width = pk.ciphertext_bytes
    return struct.pack(">I", width) + int(c.value).to_bytes(width, "big")


def deserialize_ciphertext(pk: PublicKey, data: bytes, offset: int = 0) -> tuple[Ciphertext, int]:
    value, offset = unpack_int(data, offset)
    if not 0 < value < pk.n_sq:
        raise ProtocolError("ciphertext outside (0, n**2)")
    return Ciphertext(mpz(value), pk.key_id), offset


def serialize_ciphertexts(pk: PublicKey, *cts: Ciphertext) -> bytes:
    return b"".join(serialize_ciphertext(pk, c) for c in cts)


def deserialize_ciphertexts(pk: PublicKey, data: bytes, count: int) -> list[Ciphertext]:
    out, offset = [], 0
    for _ in range(count):
        c, offset = deserialize_ciphertext(pk, data, offset)
        out.append(c)
    if offset != len(data):
        raise ProtocolError("trailing bytes after ciphertexts")
    return out


def serialize_enc_path(pk: PublicKey, points) -> bytes:
    """Point count, then x and y ciphertexts per point."""
    points = list(points)
    if not points:
        raise ValueError("a path needs at least one point")
    return struct.pack(">I", len(points)) + b"".join(
        serialize_ciphertexts(pk, x, y) for x, y in points
    )


def deserialize_enc_path(pk: PublicKey, data: bytes) -> list[tuple[Ciphertext, Ciphertext]]:
    if len(data) < 4:
        raise ProtocolError("truncated route header")
    (count,) = struct.unpack_from(">I", data)
    if count < 1:
        raise ProtocolError("encrypted route has no points")
    # each ciphertext costs at least its 4-byte header
    if 8 * count > len(data) - 4:
        raise ProtocolError("route point count does not match payload")
    cts = deserialize_ciphertexts(pk, data[4:], 2 * count)
    return list(zip(cts[0::2], cts[1::2]))


def serialize_sign(s: int) -> bytes:
    if s not in (-1, 0, 1):
        raise ValueError("sign must be -1, 0 or +1")
    return struct.pack(">b", s)


def deserialize_sign(data: bytes) -> int:
    if len(data) != 1:
        raise ProtocolError("sign response must be a single byte")
    (s,) = struct.unpack(">b", data)
    if s not in (-1, 0, 1):
        raise ProtocolError(f"invalid sign byte {s}")
    return s
