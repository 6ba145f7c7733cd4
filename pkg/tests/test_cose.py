"""COSE key codec: document form and binary CBOR form."""

from __future__ import annotations

import pytest

from vpass import p256
from vpass.core import CoseKey, b64_std_decode
from vpass.cose import (
    BYTES_PREFIX,
    deserialize_cose_key,
    emit_cbor_cose_key,
    parse_cbor_cose_key,
    serialize_cose_key,
)
from vpass.errors import MalformedCbor, MissingPrefix, UnsupportedProfile

from conftest import SAMPLE_PUBLIC_KEY_BLOCK

SAMPLE_X = b64_std_decode("zHFxjAiAduj7MrqDQBIIjh/99t42khQt0IUchij5xCE=")
SAMPLE_Y = b64_std_decode("sx9hzYecDFcgyMZ1fcu1obA4oc3rN9KjgNz1m5I7MVA=")

# x = 0 happens to be a valid P-256 x-coordinate; y computed independently
# as sqrt(b) mod p (p = 3 mod 4, so sqrt is rhs^((p+1)/4)).
ZERO_X_Y = bytes.fromhex("66485c780e2f83d72433bd5d84a06bb6541c2af31dae871728bf856a174f93f4")


def sample_key() -> CoseKey:
    return CoseKey(x=SAMPLE_X, y=SAMPLE_Y)


def hand_built_cbor(x: bytes, y: bytes) -> bytes:
    """The expected CBOR encoding assembled from raw layout constants.

    map(5) | 1: 2 | 3: -7 | -1: 1 | -2: bstr32 | -3: bstr32
    """
    return bytes(
        [0xA5, 0x01, 0x02, 0x03, 0x26, 0x20, 0x01, 0x21, 0x58, 0x20]
    ) + x + bytes([0x22, 0x58, 0x20]) + y


class TestDocumentForm:
    def test_serialize_matches_sample_block(self):
        assert serialize_cose_key(sample_key()) == SAMPLE_PUBLIC_KEY_BLOCK

    def test_serialized_order_is_fixed(self):
        assert list(serialize_cose_key(sample_key())) == ["1", "3", "-1", "-2", "-3"]

    def test_round_trip(self):
        assert deserialize_cose_key(serialize_cose_key(sample_key())) == sample_key()

    def test_deserialize_sample_block(self):
        key = deserialize_cose_key(dict(SAMPLE_PUBLIC_KEY_BLOCK))
        assert len(key.x) == 32 and len(key.y) == 32
        assert key.x[0] == 0xCC

    def test_zero_x_serialization(self):
        key = CoseKey(x=bytes(32), y=ZERO_X_Y)
        serialized = serialize_cose_key(key)
        expected = BYTES_PREFIX + "A" * 43 + "="
        assert serialized["-2"] == expected
        assert len(serialized["-2"]) == len(BYTES_PREFIX) + 44

    def test_missing_prefix_rejected(self):
        block = dict(SAMPLE_PUBLIC_KEY_BLOCK)
        block["-2"] = block["-2"][len(BYTES_PREFIX):]
        with pytest.raises(MissingPrefix):
            deserialize_cose_key(block)

    def test_prefix_is_case_sensitive(self):
        block = dict(SAMPLE_PUBLIC_KEY_BLOCK)
        block["-2"] = "BASE64_" + block["-2"][len(BYTES_PREFIX):]
        with pytest.raises(MissingPrefix):
            deserialize_cose_key(block)

    def test_missing_label_rejected(self):
        block = dict(SAMPLE_PUBLIC_KEY_BLOCK)
        del block["3"]
        with pytest.raises(UnsupportedProfile):
            deserialize_cose_key(block)

    def test_extra_label_rejected(self):
        block = dict(SAMPLE_PUBLIC_KEY_BLOCK)
        block["2"] = 1
        with pytest.raises(UnsupportedProfile):
            deserialize_cose_key(block)

    def test_integer_labels_stay_integers(self):
        serialized = serialize_cose_key(sample_key())
        assert isinstance(serialized["1"], int)
        assert isinstance(serialized["3"], int)
        assert isinstance(serialized["-1"], int)
        assert serialized["-2"].startswith(BYTES_PREFIX)
        assert serialized["-3"].startswith(BYTES_PREFIX)


class TestCborForm:
    def test_parse_hand_built_bytes(self):
        key, remaining = parse_cbor_cose_key(hand_built_cbor(SAMPLE_X, SAMPLE_Y))
        assert key == sample_key()
        assert remaining == b""

    def test_trailing_bytes_preserved(self):
        data = hand_built_cbor(SAMPLE_X, SAMPLE_Y) + b"\xde\xad\xbe\xef"
        _, remaining = parse_cbor_cose_key(data)
        assert remaining == b"\xde\xad\xbe\xef"

    def test_truncated_rejected(self):
        data = hand_built_cbor(SAMPLE_X, SAMPLE_Y)
        with pytest.raises(MalformedCbor):
            parse_cbor_cose_key(data[:-5])

    def test_not_a_map_rejected(self):
        with pytest.raises(MalformedCbor):
            parse_cbor_cose_key(b"\x58\x20" + bytes(32))

    def test_wrong_labels_rejected(self):
        # label 2 instead of 3: {1: 2, 2: -7, -1: 1, -2: x, -3: y}
        data = bytearray(hand_built_cbor(SAMPLE_X, SAMPLE_Y))
        data[3] = 0x02
        with pytest.raises(UnsupportedProfile):
            parse_cbor_cose_key(bytes(data))

    def test_emit_matches_hand_built_bytes(self):
        assert emit_cbor_cose_key(sample_key()) == hand_built_cbor(SAMPLE_X, SAMPLE_Y)

    def test_emit_is_deterministic_with_five_entries(self):
        first = emit_cbor_cose_key(sample_key())
        second = emit_cbor_cose_key(sample_key())
        assert first == second
        assert first[0] == 0xA5  # map header, 5 entries

    def test_round_trip_over_random_keys(self):
        for _ in range(100):
            key = p256.cose_from_private_key(p256.generate_private_key())
            parsed, remaining = parse_cbor_cose_key(emit_cbor_cose_key(key))
            assert parsed == key
            assert remaining == b""

    def test_document_round_trip_over_random_keys(self):
        for _ in range(100):
            key = p256.cose_from_private_key(p256.generate_private_key())
            assert deserialize_cose_key(serialize_cose_key(key)) == key
