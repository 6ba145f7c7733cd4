"""Shared domain types, challenge generation, and byte/encoding helpers.

Design choices baked in here:

* Standard padded base64 is used wherever bytes appear inside stored
  credential documents; unpadded URL-safe base64 is used for everything
  carried in query parameters.
* Only the EC2 / ES256 / P-256 COSE key profile is accepted; key
  construction validates curve membership so an off-curve point can never
  enter the system.
"""

from __future__ import annotations

import base64
import binascii
import secrets
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import InvalidBase64, InvalidBase64Url, LengthTooShort, NotOnCurve, UnsupportedProfile

MIN_CHALLENGE_LENGTH = 16
DEFAULT_CHALLENGE_LENGTH = 32

# COSE labels and the values of the single supported profile.
COSE_KTY = 1
COSE_ALG = 3
COSE_CRV = -1
COSE_X = -2
COSE_Y = -3
KTY_EC2 = 2
ALG_ES256 = -7
CRV_P256 = 1

# NIST P-256 curve parameters (y^2 = x^3 + ax + b mod p).
_P256_P = 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF
_P256_A = _P256_P - 3
_P256_B = 0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(frozen=True)
class Challenge:
    """A one-time cryptographic nonce of at least 16 bytes."""

    bytes: bytes
    issued_at: datetime = field(default_factory=_utcnow)

    def __post_init__(self) -> None:
        if len(self.bytes) < MIN_CHALLENGE_LENGTH:
            raise LengthTooShort(
                f"challenge must be at least {MIN_CHALLENGE_LENGTH} bytes, got {len(self.bytes)}"
            )


def generate_challenge(length: int = DEFAULT_CHALLENGE_LENGTH) -> Challenge:
    """Generate a fresh challenge of `length` cryptographically random bytes.

    Raises LengthTooShort when length is below the 16-byte minimum.
    """
    if length < MIN_CHALLENGE_LENGTH:
        raise LengthTooShort(
            f"challenge length must be >= {MIN_CHALLENGE_LENGTH}, got {length}"
        )
    return Challenge(bytes=secrets.token_bytes(length))


@dataclass(frozen=True)
class UserInfo:
    """Subject details carried in the credential document."""

    name: str
    email: str
    phone: str

    def is_complete(self) -> bool:
        return bool(self.name and self.email and self.phone)


@dataclass(frozen=True)
class CoseKey:
    """An EC2 public key in COSE terms, restricted to the ES256/P-256 profile.

    Construction rejects any (x, y) that is not a point on P-256.
    """

    x: bytes
    y: bytes
    kty: int = KTY_EC2
    alg: int = ALG_ES256
    crv: int = CRV_P256

    def __post_init__(self) -> None:
        if (self.kty, self.alg, self.crv) != (KTY_EC2, ALG_ES256, CRV_P256):
            raise UnsupportedProfile(
                f"only kty=2/alg=-7/crv=1 supported, got kty={self.kty} alg={self.alg} crv={self.crv}"
            )
        if len(self.x) != 32 or len(self.y) != 32:
            raise UnsupportedProfile(
                f"P-256 coordinates must be 32 bytes, got x={len(self.x)} y={len(self.y)}"
            )
        xi = int.from_bytes(self.x, "big")
        yi = int.from_bytes(self.y, "big")
        if xi >= _P256_P or yi >= _P256_P:
            raise NotOnCurve("coordinate exceeds the field modulus")
        if (yi * yi - (xi * xi * xi + _P256_A * xi + _P256_B)) % _P256_P != 0:
            raise NotOnCurve("(x, y) does not satisfy the P-256 curve equation")


@dataclass(frozen=True)
class CredentialRecord:
    """The portable identity of a passkey: device model, id, key, counter."""

    aaguid: bytes
    credential_id: bytes
    public_key: CoseKey
    sign_count: int = 0

    def __post_init__(self) -> None:
        if len(self.aaguid) != 16:
            raise ValueError(f"aaguid must be 16 bytes, got {len(self.aaguid)}")
        if not 1 <= len(self.credential_id) <= 1023:
            raise ValueError(
                f"credential_id must be 1..1023 bytes, got {len(self.credential_id)}"
            )
        if not 0 <= self.sign_count <= 0xFFFFFFFF:
            raise ValueError(f"sign_count must fit in 32 bits, got {self.sign_count}")


def b64_std_encode(data: bytes) -> str:
    """Standard-alphabet base64 with padding (used inside stored documents)."""
    return base64.b64encode(data).decode("ascii")


def b64_std_decode(text: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise InvalidBase64(f"not valid standard base64: {text!r}") from exc


def b64_url_encode(data: bytes) -> str:
    """URL-safe base64 without padding (used for query-parameter transport)."""
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def b64_url_decode(text: str) -> bytes:
    if "+" in text or "/" in text or "=" in text or len(text) % 4 == 1:
        raise InvalidBase64Url(f"not unpadded URL-safe base64: {text!r}")
    pad = -len(text) % 4
    try:
        return base64.b64decode(text + "=" * pad, altchars=b"-_", validate=True)
    except (binascii.Error, ValueError) as exc:
        raise InvalidBase64Url(f"not unpadded URL-safe base64: {text!r}") from exc
