import socket
import struct

import pytest
from hypothesis import given, settings, strategies as st

from privroute import paillier as he
from privroute.wire import (
    MAX_FRAME,
    ChannelClosed,
    CountedChannel,
    ProtocolError,
    Tag,
    deserialize_ciphertext,
    deserialize_enc_path,
    deserialize_pubkey,
    deserialize_sign,
    pack_int,
    serialize_ciphertext,
    serialize_enc_path,
    serialize_pubkey,
    serialize_sign,
    unpack_int,
)


@pytest.fixture
def pipe():
    a, b = socket.socketpair()
    left, right = CountedChannel(a, record=True), CountedChannel(b, record=True)
    yield left, right
    left.close()
    right.close()


@pytest.mark.parametrize("size", [0, 1, 517, 4096])
def test_frame_byte_count(pipe, size):
    left, right = pipe
    left.send_frame(Tag.SIGN_RESP, b"\x01" * size)
    frame = right.recv_frame()
    assert frame.tag == Tag.SIGN_RESP and frame.length == size
    assert left.bytes_out == right.bytes_in == 5 + size
    assert left.transcript == [("out", Tag.SIGN_RESP, 5 + size)]
    assert right.transcript == [("in", Tag.SIGN_RESP, 5 + size)]


def test_send_refuses_oversized_frame(pipe):
    left, _ = pipe
    with pytest.raises(ProtocolError):
        left.send_frame(Tag.ENC_ROUTE, bytes(MAX_FRAME + 1))
    assert left.bytes_out == 0


def test_recv_rejects_announced_oversized_frame(pipe):
    left, right = pipe
    left.sock.sendall(struct.pack(">IB", MAX_FRAME + 1, Tag.ENC_ROUTE))
    with pytest.raises(ProtocolError):
        right.recv_frame()


def test_recv_rejects_unknown_tag(pipe):
    left, right = pipe
    left.sock.sendall(struct.pack(">IB", 0, 0x55))
    with pytest.raises(ProtocolError, match="unknown"):
        right.recv_frame()


def test_recv_on_closed_stream(pipe):
    left, right = pipe
    left.sock.sendall(struct.pack(">IB", 10, Tag.MUL_REQ) + b"abc")
    left.close()
    with pytest.raises(ChannelClosed):
        right.recv_frame()


def test_expect_rejects_wrong_tag(pipe):
    left, right = pipe
    left.send_frame(Tag.MUL_RESP, b"")
    with pytest.raises(ProtocolError, match="expected"):
        right.expect(Tag.SIGN_RESP)


def test_byte_conservation(pipe):
    left, right = pipe
    for i, tag in enumerate([Tag.PUBKEY, Tag.MUL_REQ, Tag.SIGN_REQ, Tag.DONE]):
        left.send_frame(tag, bytes(i * 7))
        right.recv_frame()
        right.send_frame(Tag.SIGN_RESP, b"\x00")
        left.recv_frame()
    assert left.bytes_out == right.bytes_in
    assert right.bytes_out == left.bytes_in
    assert sum(s for d, _, s in left.transcript if d == "out") == left.bytes_out


@settings(max_examples=100, deadline=None)
@given(x=st.integers(min_value=0, max_value=1 << 4096))
def test_int_roundtrip(x):
    data = pack_int(x)
    assert unpack_int(data) == (x, len(data))


def test_pack_int_rejects_negative():
    with pytest.raises(ValueError):
        pack_int(-1)


def test_unpack_int_truncated():
    with pytest.raises(ProtocolError):
        unpack_int(b"\x00\x00")
    with pytest.raises(ProtocolError):
        unpack_int(b"\x00\x00\x00\x05abc")


def test_pubkey_roundtrip(pk):
    assert deserialize_pubkey(serialize_pubkey(pk)) == pk
    with pytest.raises(ProtocolError):
        deserialize_pubkey(serialize_pubkey(pk) + b"x")


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_ciphertext_roundtrip_fixed_width(pk, sk, data):
    m = data.draw(st.integers(min_value=0, max_value=int(pk.n) - 1))
    c = he.encrypt(pk, m)
    raw = serialize_ciphertext(pk, c)
    assert len(raw) == 4 + pk.ciphertext_bytes
    back, end = deserialize_ciphertext(pk, raw)
    assert end == len(raw) and back == c
    assert he.decrypt(sk, back) == m


def test_ciphertext_out_of_range_rejected(pk):
    raw = pack_int(0).rjust(4, b"\x00")
    with pytest.raises(ProtocolError):
        deserialize_ciphertext(pk, raw)
    too_big = struct.pack(">I", pk.ciphertext_bytes) + int(pk.n_sq).to_bytes(pk.ciphertext_bytes, "big")
    with pytest.raises(ProtocolError):
        deserialize_ciphertext(pk, too_big)


def test_two_point_route_size_2048(keypair_2048):
    pk, _ = keypair_2048
    assert pk.ciphertext_bytes == 512
    pts = [(he.encrypt(pk, 1), he.encrypt(pk, 2)), (he.encrypt(pk, 3), he.encrypt(pk, 4))]
    raw = serialize_enc_path(pk, pts)
    assert len(raw) == 4 + 2 * 2 * (4 + 512) == 2068
    assert deserialize_enc_path(pk, raw) == pts


def test_empty_route_rejected(pk):
    with pytest.raises(ValueError):
        serialize_enc_path(pk, [])
    with pytest.raises(ProtocolError):
        deserialize_enc_path(pk, struct.pack(">I", 0))


def test_route_count_mismatch(pk):
    raw = serialize_enc_path(pk, [(he.encrypt(pk, 1), he.encrypt(pk, 2))])
    with pytest.raises(ProtocolError):
        deserialize_enc_path(pk, struct.pack(">I", 2) + raw[4:])


@pytest.mark.parametrize("s", [-1, 0, 1])
def test_sign_roundtrip(s):
    assert deserialize_sign(serialize_sign(s)) == s


def test_sign_rejects_garbage():
    with pytest.raises(ValueError):
        serialize_sign(2)
    with pytest.raises(ProtocolError):
        deserialize_sign(b"\x05")
    with pytest.raises(ProtocolError):
        deserialize_sign(b"")
