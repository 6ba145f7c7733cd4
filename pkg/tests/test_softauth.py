"""Soft authenticator behavior: ceremonies, rp binding, state export."""

from __future__ import annotations

import pytest

from vpass.core import UserInfo, b64_url_decode, generate_challenge
from vpass.errors import MalformedState, NoMatchingCredential, WrongRpId
from vpass.softauth import EMULATOR_AAGUID, SoftAuthenticator
from vpass.webauthn import verify_assertion, verify_attestation

ORIGIN = "https://pagex.vpass.test"
RP_ID = "pagex.vpass.test"
USER = UserInfo(name="Pat", email="pat@example.org", phone="+15550112233")


def enroll(authenticator):
    challenge = generate_challenge()
    result = authenticator.make_credential(RP_ID, challenge, USER, ORIGIN)
    return verify_attestation(result, challenge, ORIGIN, RP_ID)


class TestMakeCredential:
    def test_emulator_aaguid(self, authenticator):
        record = enroll(authenticator)
        assert record.aaguid == EMULATOR_AAGUID
        assert len(EMULATOR_AAGUID) == 16

    def test_fresh_keypair_per_enrollment(self, authenticator):
        first = enroll(authenticator)
        second = enroll(authenticator)
        assert first.credential_id != second.credential_id
        assert first.public_key != second.public_key

    def test_initial_sign_count_is_zero(self, authenticator):
        assert enroll(authenticator).sign_count == 0


class TestGetAssertion:
    def test_round_trip_with_verifier(self, authenticator):
        record = enroll(authenticator)
        challenge = generate_challenge()
        assertion = authenticator.get_assertion(
            RP_ID, challenge, [record.credential_id], ORIGIN
        )
        assert b64_url_decode(assertion.credential_id_b64url) == record.credential_id
        count = verify_assertion(
            assertion, challenge, ORIGIN, RP_ID, record.public_key, 0
        )
        assert count == 1

    def test_wrong_rp_id(self, authenticator):
        record = enroll(authenticator)
        with pytest.raises(WrongRpId):
            authenticator.get_assertion(
                "phishing.example", generate_challenge(), [record.credential_id], ORIGIN
            )

    def test_no_matching_credential(self, authenticator):
        enroll(authenticator)
        with pytest.raises(NoMatchingCredential):
            authenticator.get_assertion(RP_ID, generate_challenge(), [b"\x00" * 32], ORIGIN)

    def test_monotone_counter(self, authenticator):
        record = enroll(authenticator)
        counts = []
        for _ in range(2):
            challenge = generate_challenge()
            assertion = authenticator.get_assertion(
                RP_ID, challenge, [record.credential_id], ORIGIN
            )
            counts.append(
                verify_assertion(assertion, challenge, ORIGIN, RP_ID, record.public_key, 0)
            )
        assert counts[1] == counts[0] + 1


class TestState:
    def test_export_import_round_trip(self, authenticator):
        record = enroll(authenticator)
        restored = SoftAuthenticator.import_state(authenticator.export_state())
        challenge = generate_challenge()
        assertion = restored.get_assertion(
            RP_ID, challenge, [record.credential_id], ORIGIN
        )
        assert verify_assertion(
            assertion, challenge, ORIGIN, RP_ID, record.public_key, 0
        ) > 0

    def test_import_garbage(self):
        with pytest.raises(MalformedState):
            SoftAuthenticator.import_state(b"\x00garbage")

    def test_import_wrong_version(self, authenticator):
        state = authenticator.export_state().replace(b'"version":1', b'"version":9')
        with pytest.raises(MalformedState):
            SoftAuthenticator.import_state(state)

    def test_export_is_deterministic(self, authenticator):
        enroll(authenticator)
        assert authenticator.export_state() == authenticator.export_state()

    def test_counters_survive_round_trip(self, authenticator):
        record = enroll(authenticator)
        challenge = generate_challenge()
        authenticator.get_assertion(RP_ID, challenge, [record.credential_id], ORIGIN)
        restored = SoftAuthenticator.import_state(authenticator.export_state())
        challenge = generate_challenge()
        assertion = restored.get_assertion(
            RP_ID, challenge, [record.credential_id], ORIGIN
        )
        assert (
            verify_assertion(assertion, challenge, ORIGIN, RP_ID, record.public_key, 1)
            == 2
        )
