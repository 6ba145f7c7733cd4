"""Issuer service: enrollment sessions, issuance, HTTP surface."""

from __future__ import annotations

from urllib.parse import parse_qs, urlsplit

import pytest
from fastapi.testclient import TestClient

from vpass.core import UserInfo
from vpass.errors import (
    AttestationInvalid,
    BadConfig,
    SessionExpired,
    SessionReplayed,
    UnknownSession,
    ValidationFailed,
)
from vpass.http_api import build_issuer_app
from vpass.issuer import IssuerConfig
from vpass.vcred import VerifiablePasskeyCredential, verify_credential

from conftest import ISSUER_DID, PAGEX_URL, RP_ID
from flows import pagex_create, run_enrollment, split_redirect


class TestConfig:
    def test_rp_id_must_suffix_pagex_host(self):
        config = IssuerConfig(
            issuer_did=ISSUER_DID, pagex_url=PAGEX_URL, rp_id="unrelated.example"
        )
        with pytest.raises(BadConfig):
            config.validate()

    def test_parent_domain_rp_id_accepted(self):
        IssuerConfig(
            issuer_did=ISSUER_DID, pagex_url=PAGEX_URL, rp_id="vpass.test"
        ).validate()

    def test_did_required(self):
        with pytest.raises(BadConfig):
            IssuerConfig(issuer_did="web:x", pagex_url=PAGEX_URL, rp_id=RP_ID).validate()


class TestEnrollStart:
    def test_redirects_to_pagex(self, issuer, user):
        redirect = issuer.enroll_start(user)
        parts = urlsplit(redirect)
        assert f"{parts.scheme}://{parts.netloc}{parts.path}" == PAGEX_URL
        params = {k: v[0] for k, v in parse_qs(parts.query).items()}
        assert params["mode"] == "create"
        assert "options" in params and "redirect_uri" in params

    def test_empty_email_rejected_without_session(self, issuer, user):
        with pytest.raises(ValidationFailed):
            issuer.enroll_start(UserInfo(name=user.name, email="", phone=user.phone))
        assert issuer.pending_count() == 0

    def test_fresh_challenge_and_session_per_start(self, issuer, user):
        first = issuer.enroll_start(user)
        second = issuer.enroll_start(user)
        _, first_options, first_session, _ = split_redirect(first)
        _, second_options, second_session, _ = split_redirect(second)
        assert first_session != second_session
        assert first_options["challenge"] != second_options["challenge"]

    def test_url_stays_inside_budget(self, issuer, user):
        assert len(issuer.enroll_start(user)) < 2000


class TestEnrollFinish:
    def test_issues_verifiable_credential(self, issuer, authenticator, user):
        credential = run_enrollment(issuer, authenticator, user)
        assert "VerifiablePasskey" in credential.types
        verify_credential(credential, issuer.did_document.primary_key())

    def test_session_replay_rejected(self, issuer, authenticator, user):
        session, result = pagex_create(issuer.enroll_start(user), authenticator, user)
        issuer.enroll_finish(session, result)
        with pytest.raises(SessionReplayed):
            issuer.enroll_finish(session, result)

    def test_expired_session_rejected(self, issuer, authenticator, user, clock):
        session, result = pagex_create(issuer.enroll_start(user), authenticator, user)
        clock.advance(issuer.config.challenge_ttl_seconds + 1)
        with pytest.raises(SessionExpired):
            issuer.enroll_finish(session, result)

    def test_unknown_session(self, issuer, authenticator, user):
        _, result = pagex_create(issuer.enroll_start(user), authenticator, user)
        with pytest.raises(UnknownSession):
            issuer.enroll_finish("bogus", result)

    def test_bad_attestation_consumes_session(self, issuer, authenticator, user):
        session, result = pagex_create(issuer.enroll_start(user), authenticator, user)
        other_session, other_result = pagex_create(
            issuer.enroll_start(user), authenticator, user
        )
        # Cross the results: wrong challenge for this session.
        with pytest.raises(AttestationInvalid):
            issuer.enroll_finish(session, other_result)
        with pytest.raises(SessionReplayed):
            issuer.enroll_finish(session, result)

    def test_challenges_never_reused_across_issued_credentials(
        self, issuer, authenticator, user
    ):
        challenges = set()
        for _ in range(25):
            redirect = issuer.enroll_start(user)
            _, options, session, _ = split_redirect(redirect)
            challenges.add(options["challenge"])
            session, result = pagex_create(redirect, authenticator, user)
            issuer.enroll_finish(session, result)
        assert len(challenges) == 25


class TestDidDocument:
    def test_served_at_mapped_path(self, issuer):
        assert issuer.did_document_path == "/.well-known/did.json"
        assert issuer.serve_did_document()["id"] == ISSUER_DID

    def test_served_key_verifies_fresh_credentials(self, issuer, authenticator, user):
        credential = run_enrollment(issuer, authenticator, user)
        from vpass.didweb import DidDocument

        document = DidDocument.from_document(issuer.serve_did_document())
        verify_credential(credential, document.primary_key())


class TestHttpSurface:
    @pytest.fixture
    def client(self, issuer):
        return TestClient(build_issuer_app(issuer), follow_redirects=False)

    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json()["status"] == "ok"

    def test_enroll_page_present(self, client):
        response = client.get("/enroll")
        assert response.status_code == 200
        assert "/enroll/start" in response.text

    def test_start_redirects_303(self, client, user):
        response = client.post(
            "/enroll/start",
            data={"name": user.name, "email": user.email, "phone": user.phone},
        )
        assert response.status_code == 303
        assert urlsplit(response.headers["location"]).netloc == urlsplit(PAGEX_URL).netloc

    def test_start_validation_error(self, client, user):
        response = client.post(
            "/enroll/start", data={"name": user.name, "email": "", "phone": user.phone}
        )
        assert response.status_code == 422
        assert response.json()["error"] == "ValidationFailed"

    def test_full_http_enrollment_downloads_credential(
        self, client, issuer, authenticator, user
    ):
        start = client.post(
            "/enroll/start",
            data={"name": user.name, "email": user.email, "phone": user.phone},
        )
        session, result = pagex_create(start.headers["location"], authenticator, user)
        finish = client.get(
            "/enroll/finish", params={"session": session, "result": result.to_param()}
        )
        assert finish.status_code == 200
        assert finish.headers["content-disposition"].endswith('.vpass.json"')
        credential = VerifiablePasskeyCredential.from_json(finish.text)
        assert "VerifiablePasskey" in credential.types

    def test_replayed_finish_is_409(self, client, issuer, authenticator, user):
        start = client.post(
            "/enroll/start",
            data={"name": user.name, "email": user.email, "phone": user.phone},
        )
        session, result = pagex_create(start.headers["location"], authenticator, user)
        params = {"session": session, "result": result.to_param()}
        assert client.get("/enroll/finish", params=params).status_code == 200
        replay = client.get("/enroll/finish", params=params)
        assert replay.status_code == 409
        assert replay.json()["error"] == "SessionReplayed"

    def test_pagex_error_consumes_session(self, client, issuer, authenticator, user):
        start = client.post(
            "/enroll/start",
            data={"name": user.name, "email": user.email, "phone": user.phone},
        )
        session, result = pagex_create(start.headers["location"], authenticator, user)
        aborted = client.get(
            "/enroll/finish", params={"session": session, "error": "ceremony_aborted"}
        )
        assert aborted.status_code == 400
        replay = client.get(
            "/enroll/finish", params={"session": session, "result": result.to_param()}
        )
        assert replay.status_code == 409

    def test_did_document_endpoint(self, client):
        response = client.get("/.well-known/did.json")
        assert response.status_code == 200
        assert response.json()["id"] == ISSUER_DID
        assert response.headers["content-type"].startswith("application/json")

    def test_garbage_result_param_is_400(self, client, issuer, user, authenticator):
        start = client.post(
            "/enroll/start",
            data={"name": user.name, "email": user.email, "phone": user.phone},
        )
        session, _ = pagex_create(start.headers["location"], authenticator, user)
        response = client.get(
            "/enroll/finish", params={"session": session, "result": "garbage!!"}
        )
        assert response.status_code == 400
        assert response.json()["error"] == "AttestationInvalid"
