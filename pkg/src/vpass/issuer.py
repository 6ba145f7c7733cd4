"""Issuer service: enrollment workflow and credential issuance.

Collects user details, hands the create ceremony to PageX via redirect,
validates the returned attestation, and issues the downloadable
Verifiable Passkey. The issuer keeps no record of issued credentials and
has no endpoint that participates in authentication; pending enrollment
sessions are the only state, and they are consumed or expire.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import quote, urlsplit

from cryptography.hazmat.primitives.asymmetric import ec

from . import p256
from .core import Challenge, UserInfo, generate_challenge
from .didweb import DidDocument, did_web_document_path, make_did_document
from .envelopes import MODE_CREATE, build_creation_options, encode_options
from .errors import AttestationInvalid, BadConfig, ValidationFailed, VPassError
from .sessions import OneTimeSessionStore
from .vcred import VerifiablePasskeyCredential, issue_credential
from .webauthn import CeremonyResult, url_origin, verify_attestation

log = logging.getLogger(__name__)

DEFAULT_CHALLENGE_TTL_SECONDS = 120


@dataclass(frozen=True)
class IssuerConfig:
    issuer_did: str
    pagex_url: str
    rp_id: str
    signing_key_path: Optional[Path] = None
    challenge_ttl_seconds: int = DEFAULT_CHALLENGE_TTL_SECONDS
    listen_address: str = "127.0.0.1:8801"

    def validate(self) -> None:
        if not self.issuer_did.startswith("did:"):
            raise BadConfig(f"issuer_did must be a DID, got {self.issuer_did!r}")
        if self.challenge_ttl_seconds <= 0:
            raise BadConfig("challenge_ttl_seconds must be positive")
        host = urlsplit(self.pagex_url).hostname
        if not host:
            raise BadConfig(f"pagex_url must be absolute, got {self.pagex_url!r}")
        if host != self.rp_id and not host.endswith("." + self.rp_id):
            raise BadConfig(
                f"rp_id {self.rp_id!r} is not a registrable suffix of pagex host {host!r}"
            )

    @property
    def base_url(self) -> str:
        return f"http://{self.listen_address}"


@dataclass(frozen=True)
class PendingEnrollment:
    challenge: Challenge
    user: UserInfo
    created_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


class IssuerService:
    def __init__(
        self,
        config: IssuerConfig,
        signing_key: Optional[ec.EllipticCurvePrivateKey] = None,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        config.validate()
        if signing_key is None:
            if config.signing_key_path is None:
                raise BadConfig("either signing_key or signing_key_path is required")
            signing_key = p256.private_key_from_pem(config.signing_key_path.read_bytes())
        self.config = config
        self._signing_key = signing_key
        self._sessions: OneTimeSessionStore[PendingEnrollment] = OneTimeSessionStore(
            config.challenge_ttl_seconds, clock
        )
        self.did_document: DidDocument = make_did_document(
            config.issuer_did, p256.cose_from_private_key(signing_key)
        )
        self.did_document_path: str = did_web_document_path(config.issuer_did)
        self._pagex_origin = url_origin(config.pagex_url)

    def enroll_start(self, user: UserInfo) -> str:
        """Open an enrollment session; returns the PageX redirect URL."""
        if not user.is_complete():
            raise ValidationFailed("name, email, and phone must all be non-empty")
        challenge = generate_challenge()
        token = self._sessions.create(PendingEnrollment(challenge=challenge, user=user))
        options = build_creation_options(self.config.rp_id, challenge, user)
        redirect_uri = f"{self.config.base_url}/enroll/finish?session={quote(token)}"
        log.info("enrollment started for %s", user.email)
        return (
            f"{self.config.pagex_url}?mode={MODE_CREATE}"
            f"&options={encode_options(options)}"
            f"&redirect_uri={quote(redirect_uri, safe='')}"
        )

    def enroll_finish(self, session_token: str, result: CeremonyResult) -> VerifiablePasskeyCredential:
        """Verify the attestation for a pending session and issue the credential.

        The session is consumed whether or not verification succeeds.
        """
        pending = self._sessions.consume(session_token)
        try:
            record = verify_attestation(
                result,
                expected_challenge=pending.challenge,
                expected_origin=self._pagex_origin,
                rp_id=self.config.rp_id,
            )
        except VPassError as exc:
            log.warning("attestation rejected: %s", exc)
            raise AttestationInvalid(str(exc)) from exc
        credential = issue_credential(
            record=record,
            user=pending.user,
            pagex_url=self.config.pagex_url,
            issuer_did=self.config.issuer_did,
            issuer_signing_key=self._signing_key,
        )
        log.info("issued credential %s for %s", credential.id, pending.user.email)
        return credential

    def enroll_finish_abort(self, session_token: str) -> None:
        """Consume the session for a ceremony that failed on PageX."""
        self._sessions.consume(session_token)

    def serve_did_document(self) -> dict:
        return self.did_document.to_document()

    def pending_count(self) -> int:
        return self._sessions.live_count()
