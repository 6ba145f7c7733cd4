"""COSE key codec: the string-keyed document form and the binary CBOR form.

The document form is the one embedded in credential files: decimal-string
labels, integer parameters kept as integers, byte parameters rendered as
standard base64 with the magic word ``base64_`` prepended. The binary form
is the canonical CBOR map found inside attested credential data. Only the
EC2/ES256/P-256 profile is handled; unknown labels are rejected rather than
preserved.
"""

from __future__ import annotations

from typing import Union

from .core import CoseKey, b64_std_decode, b64_std_encode
from .errors import MalformedCbor, MissingPrefix, UnsupportedProfile

SerializedCoseKey = dict[str, Union[int, str]]

BYTES_PREFIX = "base64_"

# Document labels in the order the credential file shows them.
_INT_LABELS = ("1", "3", "-1")
_BYTE_LABELS = ("-2", "-3")
_ALL_LABELS = _INT_LABELS + _BYTE_LABELS


def serialize_cose_key(key: CoseKey) -> SerializedCoseKey:
    """Render a key as the string-keyed document form.

    Integer parameters stay integers; x and y become ``base64_``-prefixed
    standard base64 strings. Entry order is fixed as 1, 3, -1, -2, -3.
    """
    return {
        "1": key.kty,
        "3": key.alg,
        "-1": key.crv,
        "-2": BYTES_PREFIX + b64_std_encode(key.x),
        "-3": BYTES_PREFIX + b64_std_encode(key.y),
    }


def deserialize_cose_key(serialized: SerializedCoseKey) -> CoseKey:
    """Parse the string-keyed document form back into a key.

    Strips the ``base64_`` prefix from byte-typed entries, decodes them, and
    validates the supported profile and curve membership.
    """
    present = set(serialized)
    if present != set(_ALL_LABELS):
        missing = set(_ALL_LABELS) - present
        extra = present - set(_ALL_LABELS)
        raise UnsupportedProfile(
            f"COSE key labels mismatch: missing={sorted(missing)} extra={sorted(extra)}"
        )
    ints = {}
    for label in _INT_LABELS:
        value = serialized[label]
        if not isinstance(value, int) or isinstance(value, bool):
            raise UnsupportedProfile(f"label {label} must be an integer, got {value!r}")
        ints[label] = value
    coords = {}
    for label in _BYTE_LABELS:
        value = serialized[label]
        if not isinstance(value, str):
            raise MissingPrefix(f"label {label} must be a '{BYTES_PREFIX}' string, got {value!r}")
        if not value.startswith(BYTES_PREFIX):
            raise MissingPrefix(f"label {label} value lacks the '{BYTES_PREFIX}' prefix")
        coords[label] = b64_std_decode(value[len(BYTES_PREFIX):])
    return CoseKey(
        kty=ints["1"],
        alg=ints["3"],
        crv=ints["-1"],
        x=coords["-2"],
        y=coords["-3"],
    )


# --- binary CBOR form ---------------------------------------------------------
#
# Only the tiny subset a COSE EC2 key needs: maps with integer labels whose
# values are integers or byte strings. Emission is canonical: shortest-form
# argument encodings, entries ordered by the bytewise order of their encoded
# labels (1, 3, -1, -2, -3 for this profile).


def _emit_head(major: int, argument: int) -> bytes:
    if argument < 24:
        return bytes([(major << 5) | argument])
    if argument < 0x100:
        return bytes([(major << 5) | 24, argument])
    if argument < 0x10000:
        return bytes([(major << 5) | 25]) + argument.to_bytes(2, "big")
    if argument < 0x100000000:
        return bytes([(major << 5) | 26]) + argument.to_bytes(4, "big")
    return bytes([(major << 5) | 27]) + argument.to_bytes(8, "big")


def _emit_int(value: int) -> bytes:
    if value >= 0:
        return _emit_head(0, value)
    return _emit_head(1, -1 - value)


def _emit_bytes(value: bytes) -> bytes:
    return _emit_head(2, len(value)) + value


def emit_cbor_cose_key(key: CoseKey) -> bytes:
    """Emit the canonical CBOR map for a key; round-trips through parse."""
    out = bytearray(_emit_head(5, 5))
    for label, value in (
        (1, key.kty),
        (3, key.alg),
        (-1, key.crv),
        (-2, key.x),
        (-3, key.y),
    ):
        out += _emit_int(label)
        out += _emit_bytes(value) if isinstance(value, bytes) else _emit_int(value)
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedCbor("truncated CBOR item")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def head(self) -> tuple[int, int]:
        initial = self.take(1)[0]
        major, info = initial >> 5, initial & 0x1F
        if info < 24:
            return major, info
        if info == 24:
            return major, self.take(1)[0]
        if info == 25:
            return major, int.from_bytes(self.take(2), "big")
        if info == 26:
            return major, int.from_bytes(self.take(4), "big")
        if info == 27:
            return major, int.from_bytes(self.take(8), "big")
        raise MalformedCbor(f"unsupported CBOR additional info {info}")

    def item(self) -> Union[int, bytes]:
        major, argument = self.head()
        if major == 0:
            return argument
        if major == 1:
            return -1 - argument
        if major == 2:
            return self.take(argument)
        raise MalformedCbor(f"unsupported CBOR major type {major} in COSE key")


def parse_cbor_cose_key(data: bytes) -> tuple[CoseKey, bytes]:
    """Parse a CBOR COSE key map from the front of `data`.

    Returns the key and whatever bytes follow the map (authenticator data
    layouts place the key last, but extensions may trail it).
    """
    reader = _Reader(data)
    major, count = reader.head()
    if major != 5:
        raise MalformedCbor(f"expected a CBOR map, got major type {major}")
    entries: dict[int, Union[int, bytes]] = {}
    for _ in range(count):
        label = reader.item()
        if not isinstance(label, int):
            raise MalformedCbor("COSE key labels must be integers")
        if label in entries:
            raise MalformedCbor(f"duplicate COSE label {label}")
        entries[label] = reader.item()
    expected = {1, 3, -1, -2, -3}
    if set(entries) != expected:
        raise UnsupportedProfile(
            f"COSE key labels mismatch: got {sorted(entries)}, want {sorted(expected)}"
        )
    if not all(isinstance(entries[label], int) for label in (1, 3, -1)):
        raise UnsupportedProfile("labels 1, 3, -1 must be integers")
    if not all(isinstance(entries[label], bytes) for label in (-2, -3)):
        raise UnsupportedProfile("labels -2, -3 must be byte strings")
    key = CoseKey(
        kty=entries[1],
        alg=entries[3],
        crv=entries[-1],
        x=entries[-2],
        y=entries[-3],
    )
    return key, data[reader.pos:]


__all__ = [
    "BYTES_PREFIX",
    "SerializedCoseKey",
    "serialize_cose_key",
    "deserialize_cose_key",
    "emit_cbor_cose_key",
    "parse_cbor_cose_key",
]
