"""Query-parameter envelopes exchanged with PageX.

Options travel to PageX as one base64url-encoded compact-JSON value in the
`options` parameter; ceremony results come back the same way in `result`
(see webauthn.CeremonyResult). Envelopes are kept small so full redirect
URLs stay inside a ~2,000-character budget.
"""

from __future__ import annotations

import json

from .core import Challenge, UserInfo, b64_url_decode, b64_url_encode

MODE_CREATE = "create"
MODE_GET = "get"


def build_creation_options(rp_id: str, challenge: Challenge, user: UserInfo) -> dict:
    return {
        "rp_id": rp_id,
        "challenge": b64_url_encode(challenge.bytes),
        "user": {"name": user.name, "email": user.email, "phone": user.phone},
    }


def build_request_options(
    rp_id: str, challenge: Challenge, allowed_credential_ids: list[bytes]
) -> dict:
    return {
        "rp_id": rp_id,
        "challenge": b64_url_encode(challenge.bytes),
        "allow_credential_ids": [b64_url_encode(cid) for cid in allowed_credential_ids],
    }


def encode_options(options: dict) -> str:
    return b64_url_encode(json.dumps(options, separators=(",", ":")).encode("utf-8"))


def decode_options(param: str) -> dict:
    options = json.loads(b64_url_decode(param))
    if not isinstance(options, dict):
        raise ValueError("options envelope must be a JSON object")
    return options
