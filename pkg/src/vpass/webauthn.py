"""Parse and verify WebAuthn ceremony outputs.

Covers the pieces both issuer and verifier need: clientDataJSON parsing,
the binary authenticator-data layout, attestation checks at enrollment,
assertion checks at authentication, and the PageX origin check.

Attestation handling is deliberately "none"-style: the enrollment check is
challenge/origin/rp binding plus self-consistent attested credential data,
with no attestation-statement chain validation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional
from urllib.parse import urlsplit

from . import p256
from .core import Challenge, CoseKey, CredentialRecord, b64_url_decode, b64_url_encode
from .cose import emit_cbor_cose_key, parse_cbor_cose_key
from .errors import (
    AttestedDataMissing,
    BadSignature,
    ChallengeMismatch,
    CounterRegression,
    MalformedClientData,
    MalformedUrl,
    NoAttestedCredential,
    OriginMismatch,
    RpIdMismatch,
    TooShort,
    TrailingGarbage,
    UnknownCeremonyType,
    UserNotPresent,
)

FLAG_UP = 0x01
FLAG_UV = 0x04
FLAG_AT = 0x40

_FIXED_HEADER_LEN = 37  # rpIdHash(32) + flags(1) + signCount(4)


class CeremonyType(Enum):
    CREATE = "webauthn.create"
    GET = "webauthn.get"


@dataclass(frozen=True)
class ClientData:
    ceremony_type: CeremonyType
    challenge_b64url: str
    origin: str

    @property
    def challenge_bytes(self) -> bytes:
        return b64_url_decode(self.challenge_b64url)


@dataclass(frozen=True)
class AttestedCredential:
    aaguid: bytes
    credential_id: bytes
    public_key: CoseKey


@dataclass(frozen=True)
class AuthenticatorData:
    rp_id_hash: bytes
    flags: int
    sign_count: int
    attested: Optional[AttestedCredential] = None

    @property
    def user_present(self) -> bool:
        return bool(self.flags & FLAG_UP)

    @property
    def user_verified(self) -> bool:
        return bool(self.flags & FLAG_UV)

    def encode(self) -> bytes:
        """Rebuild the binary layout; inverse of parse_authenticator_data."""
        out = bytearray(self.rp_id_hash)
        out.append(self.flags)
        out += self.sign_count.to_bytes(4, "big")
        if self.attested is not None:
            out += self.attested.aaguid
            out += len(self.attested.credential_id).to_bytes(2, "big")
            out += self.attested.credential_id
            out += emit_cbor_cose_key(self.attested.public_key)
        return bytes(out)


@dataclass(frozen=True)
class CeremonyResult:
    """Transport envelope for one ceremony outcome.

    Travels as a JSON object {id, clientDataJSON, authenticatorData,
    signature}, each field base64url, the whole envelope base64url-encoded
    when carried in a `result` query parameter.
    """

    credential_id_b64url: str
    client_data_b64url: str
    authenticator_data_b64url: str
    signature_b64url: Optional[str] = None

    def to_envelope(self) -> dict:
        envelope = {
            "id": self.credential_id_b64url,
            "clientDataJSON": self.client_data_b64url,
            "authenticatorData": self.authenticator_data_b64url,
        }
        if self.signature_b64url is not None:
            envelope["signature"] = self.signature_b64url
        return envelope

    @classmethod
    def from_envelope(cls, envelope: dict) -> "CeremonyResult":
        if not isinstance(envelope, dict):
            raise ValueError("ceremony envelope must be a JSON object")
        for field_name in ("id", "clientDataJSON", "authenticatorData"):
            if not isinstance(envelope.get(field_name), str):
                raise ValueError(f"ceremony envelope missing field {field_name!r}")
        signature = envelope.get("signature")
        if signature is not None and not isinstance(signature, str):
            raise ValueError("ceremony envelope signature must be a string")
        return cls(
            credential_id_b64url=envelope["id"],
            client_data_b64url=envelope["clientDataJSON"],
            authenticator_data_b64url=envelope["authenticatorData"],
            signature_b64url=signature,
        )

    def to_param(self) -> str:
        return b64_url_encode(
            json.dumps(self.to_envelope(), separators=(",", ":")).encode("utf-8")
        )

    @classmethod
    def from_param(cls, param: str) -> "CeremonyResult":
        try:
            envelope = json.loads(b64_url_decode(param))
        except Exception as exc:
            raise ValueError(f"undecodable ceremony result parameter: {exc}") from exc
        return cls.from_envelope(envelope)


def parse_client_data(data: bytes) -> ClientData:
    """Parse clientDataJSON bytes; unknown members are ignored."""
    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedClientData(f"clientDataJSON does not parse: {exc}") from exc
    if not isinstance(document, dict):
        raise MalformedClientData("clientDataJSON must be a JSON object")
    for field_name in ("type", "challenge", "origin"):
        if not isinstance(document.get(field_name), str):
            raise MalformedClientData(f"clientDataJSON missing field {field_name!r}")
    try:
        ceremony_type = CeremonyType(document["type"])
    except ValueError:
        raise UnknownCeremonyType(f"unknown ceremony type {document['type']!r}") from None
    client = ClientData(
        ceremony_type=ceremony_type,
        challenge_b64url=document["challenge"],
        origin=document["origin"],
    )
    try:
        challenge = client.challenge_bytes
    except Exception as exc:
        raise MalformedClientData(f"challenge is not base64url: {exc}") from exc
    if len(challenge) < 16:
        raise MalformedClientData(f"challenge too short: {len(challenge)} bytes")
    return client


def parse_authenticator_data(data: bytes) -> AuthenticatorData:
    """Decode the binary authenticator-data layout.

    rpIdHash(32) | flags(1) | signCount(4, BE) and, when the AT flag is
    set, aaguid(16) | idLen(2, BE) | id | CBOR COSE key.
    """
    if len(data) < _FIXED_HEADER_LEN:
        raise TooShort(f"authenticator data is {len(data)} bytes, need {_FIXED_HEADER_LEN}")
    rp_id_hash = data[:32]
    flags = data[32]
    sign_count = int.from_bytes(data[33:37], "big")
    rest = data[_FIXED_HEADER_LEN:]
    attested = None
    if flags & FLAG_AT:
        if len(rest) < 18:
            raise AttestedDataMissing("AT flag set but attested credential data truncated")
        aaguid = rest[:16]
        id_len = int.from_bytes(rest[16:18], "big")
        if len(rest) < 18 + id_len:
            raise AttestedDataMissing("credential id truncated")
        credential_id = rest[18:18 + id_len]
        public_key, rest = parse_cbor_cose_key(rest[18 + id_len:])
        attested = AttestedCredential(
            aaguid=aaguid, credential_id=credential_id, public_key=public_key
        )
    if rest:
        raise TrailingGarbage(f"{len(rest)} unconsumed bytes after authenticator data")
    return AuthenticatorData(
        rp_id_hash=rp_id_hash, flags=flags, sign_count=sign_count, attested=attested
    )


def _decode_result_fields(result: CeremonyResult, expected: CeremonyType) -> tuple[bytes, ClientData, bytes]:
    try:
        client_data_bytes = b64_url_decode(result.client_data_b64url)
        auth_data_bytes = b64_url_decode(result.authenticator_data_b64url)
    except Exception as exc:
        raise MalformedClientData(f"ceremony result fields not base64url: {exc}") from exc
    client = parse_client_data(client_data_bytes)
    if client.ceremony_type is not expected:
        raise MalformedClientData(
            f"expected {expected.value}, got {client.ceremony_type.value}"
        )
    return client_data_bytes, client, auth_data_bytes


def _check_binding(
    client: ClientData,
    auth: AuthenticatorData,
    expected_challenge: Challenge,
    expected_origin: str,
    rp_id: str,
) -> None:
    if client.challenge_bytes != expected_challenge.bytes:
        raise ChallengeMismatch("client data challenge differs from the issued challenge")
    if client.origin != expected_origin:
        raise OriginMismatch(
            f"client data origin {client.origin!r} != expected {expected_origin!r}"
        )
    if auth.rp_id_hash != hashlib.sha256(rp_id.encode("utf-8")).digest():
        raise RpIdMismatch(f"rpIdHash is not SHA-256({rp_id!r})")
    if not auth.user_present:
        raise UserNotPresent("user-present flag not set")


def verify_attestation(
    result: CeremonyResult,
    expected_challenge: Challenge,
    expected_origin: str,
    rp_id: str,
    require_user_verified: bool = False,
) -> CredentialRecord:
    """Validate an enrollment ceremony and extract the new credential.

    Checks, in order: challenge binding, origin, rp id hash, user presence
    (and user verification when required), presence of attested credential
    data with a supported key.
    """
    _, client, auth_data_bytes = _decode_result_fields(result, CeremonyType.CREATE)
    auth = parse_authenticator_data(auth_data_bytes)
    _check_binding(client, auth, expected_challenge, expected_origin, rp_id)
    if require_user_verified and not auth.user_verified:
        raise UserNotPresent("user-verified flag required but not set")
    if auth.attested is None:
        raise NoAttestedCredential("attestation carries no attested credential data")
    return CredentialRecord(
        aaguid=auth.attested.aaguid,
        credential_id=auth.attested.credential_id,
        public_key=auth.attested.public_key,
        sign_count=auth.sign_count,
    )


def verify_assertion(
    result: CeremonyResult,
    expected_challenge: Challenge,
    expected_origin: str,
    rp_id: str,
    key: CoseKey,
    last_sign_count: int = 0,
) -> int:
    """Validate an authentication ceremony; returns the new sign count.

    The ES256 signature must verify over authenticatorData || SHA-256 of
    clientDataJSON. Counter regression is an error only when both the old
    and new counters are nonzero (always-zero authenticators tolerated).
    """
    if result.signature_b64url is None:
        raise BadSignature("assertion carries no signature")
    client_data_bytes, client, auth_data_bytes = _decode_result_fields(
        result, CeremonyType.GET
    )
    auth = parse_authenticator_data(auth_data_bytes)
    _check_binding(client, auth, expected_challenge, expected_origin, rp_id)
    try:
        signature = b64_url_decode(result.signature_b64url)
    except Exception as exc:
        raise BadSignature(f"signature is not base64url: {exc}") from exc
    message = auth_data_bytes + hashlib.sha256(client_data_bytes).digest()
    if not p256.verify_der(key, message, signature):
        raise BadSignature("assertion signature does not verify")
    if auth.sign_count != 0 and last_sign_count != 0 and auth.sign_count <= last_sign_count:
        raise CounterRegression(
            f"sign count went from {last_sign_count} to {auth.sign_count}"
        )
    return auth.sign_count


def url_origin(url: str) -> str:
    """scheme://host[:port] of an absolute http(s) URL, default port dropped."""
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.hostname:
        raise MalformedUrl(f"not an absolute http(s) URL: {url!r}")
    origin = f"{parts.scheme}://{parts.hostname.lower()}"
    default_port = 443 if parts.scheme == "https" else 80
    if parts.port is not None and parts.port != default_port:
        origin += f":{parts.port}"
    return origin


def check_pagex_origin(client_data: ClientData, pagex_url: str) -> bool:
    """True iff the ceremony ran on the page the credential names."""
    return client_data.origin == url_origin(pagex_url)
