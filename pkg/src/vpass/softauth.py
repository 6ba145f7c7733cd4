"""In-process FIDO2 authenticator emulator.

Produces standards-shaped attestations and assertions so the whole
protocol runs headlessly in tests and demos, standing in for a platform
authenticator or security key. Keys are held in ordinary process memory;
exported state contains private keys in the clear and is a test fixture,
not a production wallet. Protect exported files accordingly.
"""

from __future__ import annotations

import hashlib
import json
import secrets
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from cryptography.hazmat.primitives.asymmetric import ec

from . import p256
from .core import Challenge, UserInfo, b64_url_decode, b64_url_encode
from .errors import MalformedState, NoMatchingCredential, WrongRpId
from .webauthn import (
    FLAG_AT,
    FLAG_UP,
    AttestedCredential,
    AuthenticatorData,
    CeremonyResult,
    CeremonyType,
)

# Fixed 16-byte emulator model id, recognizable in test output.
EMULATOR_AAGUID = b"VPASS-SOFT-AUTH0"

_STATE_VERSION = 1


@dataclass
class StoredCredential:
    rp_id: str
    credential_id: bytes
    private_key: ec.EllipticCurvePrivateKey
    sign_count: int
    user: UserInfo


def _client_data_json(ceremony: CeremonyType, challenge: Challenge, origin: str) -> bytes:
    document = {
        "type": ceremony.value,
        "challenge": b64_url_encode(challenge.bytes),
        "origin": origin,
    }
    return json.dumps(document, separators=(",", ":")).encode("utf-8")


class SoftAuthenticator:
    """Software authenticator holding any number of discoverable credentials.

    One instance is single-writer (assertions mutate sign counters);
    independent instances can be used concurrently.
    """

    def __init__(self, presence_hook: Optional[Callable[[], bool]] = None) -> None:
        # presence_hook lets tests simulate the user declining the prompt;
        # a denied ceremony emits authenticator data without the UP flag.
        self._presence_hook = presence_hook or (lambda: True)
        self._credentials: dict[bytes, StoredCredential] = {}

    def make_credential(
        self,
        rp_id: str,
        challenge: Challenge,
        user: UserInfo,
        origin: str,
    ) -> CeremonyResult:
        """Create a fresh P-256 credential bound to rp_id; returns the attestation."""
        private_key = p256.generate_private_key()
        credential_id = secrets.token_bytes(32)
        self._credentials[credential_id] = StoredCredential(
            rp_id=rp_id,
            credential_id=credential_id,
            private_key=private_key,
            sign_count=0,
            user=user,
        )
        flags = FLAG_AT | (FLAG_UP if self._presence_hook() else 0)
        auth_data = AuthenticatorData(
            rp_id_hash=hashlib.sha256(rp_id.encode("utf-8")).digest(),
            flags=flags,
            sign_count=0,
            attested=AttestedCredential(
                aaguid=EMULATOR_AAGUID,
                credential_id=credential_id,
                public_key=p256.cose_from_private_key(private_key),
            ),
        )
        return CeremonyResult(
            credential_id_b64url=b64_url_encode(credential_id),
            client_data_b64url=b64_url_encode(
                _client_data_json(CeremonyType.CREATE, challenge, origin)
            ),
            authenticator_data_b64url=b64_url_encode(auth_data.encode()),
        )

    def get_assertion(
        self,
        rp_id: str,
        challenge: Challenge,
        allowed_credential_ids: Iterable[bytes],
        origin: str,
    ) -> CeremonyResult:
        """Sign a challenge with a stored credential from the allow list.

        Refuses to sign for any rp_id other than the one the credential was
        created under.
        """
        match = None
        for credential_id in allowed_credential_ids:
            stored = self._credentials.get(bytes(credential_id))
            if stored is not None:
                match = stored
                break
        if match is None:
            raise NoMatchingCredential("no stored credential matches the allow list")
        if match.rp_id != rp_id:
            raise WrongRpId(
                f"credential is bound to {match.rp_id!r}, refusing {rp_id!r}"
            )
        match.sign_count += 1
        flags = FLAG_UP if self._presence_hook() else 0
        auth_data_bytes = AuthenticatorData(
            rp_id_hash=hashlib.sha256(rp_id.encode("utf-8")).digest(),
            flags=flags,
            sign_count=match.sign_count,
        ).encode()
        client_data_bytes = _client_data_json(CeremonyType.GET, challenge, origin)
        message = auth_data_bytes + hashlib.sha256(client_data_bytes).digest()
        signature = p256.sign_der(match.private_key, message)
        return CeremonyResult(
            credential_id_b64url=b64_url_encode(match.credential_id),
            client_data_b64url=b64_url_encode(client_data_bytes),
            authenticator_data_b64url=b64_url_encode(auth_data_bytes),
            signature_b64url=b64_url_encode(signature),
        )

    def credential_ids(self) -> list[bytes]:
        return list(self._credentials)

    def export_state(self) -> bytes:
        """Serialize all credentials (private keys included, in clear)."""
        records = [
            {
                "rp_id": stored.rp_id,
                "credential_id": b64_url_encode(stored.credential_id),
                "private_key_pem": p256.private_key_to_pem(stored.private_key).decode("ascii"),
                "sign_count": stored.sign_count,
                "user": {
                    "name": stored.user.name,
                    "email": stored.user.email,
                    "phone": stored.user.phone,
                },
            }
            for stored in self._credentials.values()
        ]
        return json.dumps(
            {"version": _STATE_VERSION, "credentials": records},
            sort_keys=True,
            separators=(",", ":"),
        ).encode("utf-8")

    @classmethod
    def import_state(
        cls, data: bytes, presence_hook: Optional[Callable[[], bool]] = None
    ) -> "SoftAuthenticator":
        try:
            state = json.loads(data.decode("utf-8"))
            if state["version"] != _STATE_VERSION:
                raise MalformedState(f"unsupported state version {state['version']!r}")
            authenticator = cls(presence_hook=presence_hook)
            for record in state["credentials"]:
                credential_id = b64_url_decode(record["credential_id"])
                authenticator._credentials[credential_id] = StoredCredential(
                    rp_id=record["rp_id"],
                    credential_id=credential_id,
                    private_key=p256.private_key_from_pem(
                        record["private_key_pem"].encode("ascii")
                    ),
                    sign_count=int(record["sign_count"]),
                    user=UserInfo(**record["user"]),
                )
            return authenticator
        except MalformedState:
            raise
        except Exception as exc:
            raise MalformedState(f"authenticator state does not parse: {exc}") from exc
