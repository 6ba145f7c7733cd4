"""Verifier service: authentication from an uploaded Verifiable Passkey.

Verifies the credential offline against a trusted issuer key, runs the
assertion ceremony through the credential's own PageX, and establishes a
short-lived authenticated session. Nothing the user uploads is kept past
the pending ceremony; there is no user database.
"""

from __future__ import annotations

import logging
import secrets
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional
from urllib.parse import quote, urlsplit

from .core import Challenge, CoseKey, UserInfo, b64_url_decode, b64_url_encode, generate_challenge
from .didweb import CachePolicy, DidWebResolver
from .envelopes import MODE_GET, build_request_options, encode_options
from .errors import (
    AssertionInvalid,
    BadConfig,
    CredentialIdMismatch,
    MalformedUpload,
    ProofInvalid,
    ResolutionFailed,
    UntrustedIssuer,
    VPassError,
)
from .sessions import OneTimeSessionStore
from .vcred import parse_uploaded_document, verify_credential
from .webauthn import CeremonyResult, parse_client_data, url_origin, verify_assertion

log = logging.getLogger(__name__)

DEFAULT_CHALLENGE_TTL_SECONDS = 120
DEFAULT_SESSION_LIFETIME_SECONDS = 30 * 60


@dataclass(frozen=True)
class VerifierConfig:
    trusted_issuer_dids: tuple[str, ...]
    did_cache_policy: CachePolicy = CachePolicy.PINNED_ONLY
    challenge_ttl_seconds: int = DEFAULT_CHALLENGE_TTL_SECONDS
    listen_address: str = "127.0.0.1:8802"
    enforce_pagex_origin: bool = True
    session_lifetime_seconds: int = DEFAULT_SESSION_LIFETIME_SECONDS

    def validate(self) -> None:
        if not self.trusted_issuer_dids:
            raise BadConfig("trusted_issuer_dids must not be empty")
        if self.challenge_ttl_seconds <= 0:
            raise BadConfig("challenge_ttl_seconds must be positive")

    @property
    def base_url(self) -> str:
        return f"http://{self.listen_address}"


@dataclass(frozen=True)
class PendingAuth:
    challenge: Challenge
    expected_key: CoseKey
    expected_credential_id: bytes
    pagex_origin: str
    pagex_url: str
    user: UserInfo
    created_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


@dataclass(frozen=True)
class AuthOutcome:
    user: UserInfo
    session_token: str
    sign_count: int


class VerifierService:
    def __init__(
        self,
        config: VerifierConfig,
        resolver: Optional[DidWebResolver] = None,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        config.validate()
        self.config = config
        self.resolver = resolver if resolver is not None else DidWebResolver()
        self._clock = clock
        self._pending: OneTimeSessionStore[PendingAuth] = OneTimeSessionStore(
            config.challenge_ttl_seconds, clock
        )
        self._authed_lock = threading.Lock()
        self._authed: dict[str, tuple[UserInfo, float]] = {}

    def auth_start(self, document_text: str) -> str:
        """Verify an uploaded credential; returns the PageX redirect URL."""
        try:
            vc = parse_uploaded_document(document_text)
        except ProofInvalid:
            raise
        except VPassError as exc:
            raise MalformedUpload(str(exc)) from exc
        if vc.issuer not in self.config.trusted_issuer_dids:
            raise UntrustedIssuer(f"issuer {vc.issuer!r} is not in the allow list")
        try:
            did_document = self.resolver.resolve(vc.issuer, self.config.did_cache_policy)
        except VPassError as exc:
            raise ResolutionFailed(str(exc)) from exc
        try:
            user, pagex_url, record = verify_credential(vc, did_document.primary_key())
        except ProofInvalid:
            raise
        except VPassError as exc:
            raise MalformedUpload(str(exc)) from exc
        challenge = generate_challenge()
        rp_id = urlsplit(pagex_url).hostname or ""
        token = self._pending.create(
            PendingAuth(
                challenge=challenge,
                expected_key=record.public_key,
                expected_credential_id=record.credential_id,
                pagex_origin=url_origin(pagex_url),
                pagex_url=pagex_url,
                user=user,
            )
        )
        options = build_request_options(rp_id, challenge, [record.credential_id])
        redirect_uri = f"{self.config.base_url}/auth/finish?session={quote(token)}"
        log.info("auth started for %s via %s", user.email, pagex_url)
        return (
            f"{pagex_url}?mode={MODE_GET}"
            f"&options={encode_options(options)}"
            f"&redirect_uri={quote(redirect_uri, safe='')}"
        )

    def auth_finish(self, session_token: str, result: CeremonyResult) -> AuthOutcome:
        """Verify the assertion for a pending session; returns the identity.

        The session is consumed whether or not verification succeeds.
        """
        pending = self._pending.consume(session_token)
        try:
            credential_id = b64_url_decode(result.credential_id_b64url)
        except VPassError as exc:
            raise AssertionInvalid(f"credential id not base64url: {exc}") from exc
        if credential_id != pending.expected_credential_id:
            raise CredentialIdMismatch(
                "assertion credential id differs from the credential bound to this session"
            )
        rp_id = urlsplit(pending.pagex_url).hostname or ""
        if self.config.enforce_pagex_origin:
            expected_origin = pending.pagex_origin
        else:
            # PageX origin checking is optional for verifiers (the issuer
            # already bound the ceremony origin at enrollment): accept the
            # ceremony origin as-is, everything else still binds.
            try:
                client = parse_client_data(b64_url_decode(result.client_data_b64url))
                expected_origin = client.origin
            except VPassError as exc:
                raise AssertionInvalid(str(exc)) from exc
        try:
            new_count = verify_assertion(
                result,
                expected_challenge=pending.challenge,
                expected_origin=expected_origin,
                rp_id=rp_id,
                key=pending.expected_key,
                last_sign_count=0,
            )
        except VPassError as exc:
            log.warning("assertion rejected: %s", exc)
            raise AssertionInvalid(str(exc)) from exc
        session_token = b64_url_encode(secrets.token_bytes(24))
        with self._authed_lock:
            self._authed[session_token] = (
                pending.user,
                self._clock() + self.config.session_lifetime_seconds,
            )
        log.info("authenticated %s", pending.user.email)
        return AuthOutcome(user=pending.user, session_token=session_token, sign_count=new_count)

    def auth_finish_abort(self, session_token: str) -> None:
        """Consume the session for a ceremony that failed on PageX."""
        self._pending.consume(session_token)

    def session_user(self, session_token: str) -> Optional[UserInfo]:
        now = self._clock()
        with self._authed_lock:
            entry = self._authed.get(session_token)
            if entry is None or entry[1] < now:
                return None
            return entry[0]

    def storage_report(self) -> dict:
        """Enumerate persisted user data; side-effect-free.

        Pending ceremonies are the only place credential material lives,
        and authenticated sessions hold only the user identity until they
        expire. The verifier writes nothing durable.
        """
        now = self._clock()
        pending = self._pending.live_count()
        with self._authed_lock:
            authed = sum(1 for _, expires in self._authed.values() if expires >= now)
        return {
            "pending_auth_sessions": pending,
            "authenticated_sessions": authed,
            "credential_records": pending,
            "durable_records": 0,
        }
