"""Shared fixtures: conformance sample values and wired-up services."""

from __future__ import annotations

import pytest

from vpass import p256
from vpass.core import UserInfo
from vpass.didweb import DidWebResolver, InstrumentedTransport
from vpass.issuer import IssuerConfig, IssuerService
from vpass.softauth import SoftAuthenticator
from vpass.verifier import VerifierConfig, VerifierService


class FakeClock:
    def __init__(self, start: float = 1000.0) -> None:
        self.now = start

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += seconds


# The credential file published with the protocol description; used as a
# conformance vector throughout the suite.
SAMPLE_PUBLIC_KEY_BLOCK = {
    "1": 2,
    "3": -7,
    "-1": 1,
    "-2": "base64_zHFxjAiAduj7MrqDQBIIjh/99t42khQt0IUchij5xCE=",
    "-3": "base64_sx9hzYecDFcgyMZ1fcu1obA4oc3rN9KjgNz1m5I7MVA=",
}

SAMPLE_CREDENTIAL_DOCUMENT = {
    "@context": ["https://www.w3.org/2018/credentials/v1"],
    "id": "http://example.org/credentials/3732",
    "type": ["VerifiableCredential", "VerifiablePasskey"],
    "issuer": "did:web:AdityaMitra5102.github.io/VPass-Issuer",
    "issuanceDate": "2025-11-24T18:19:08.216905",
    "credentialSubject": {
        "id": "User creds",
        "user": {
            "email": "adityaarghya0@gmail.com",
            "name": "Aditya Mitra",
            "phone": "+91xxxxxxxxxx",
        },
        "pagex": "https://adityamitra5102.github.io/VerifiablePasskey/pagex.html",
        "cred": {
            "aaguid": "nd0YF69aRnKiuT492VAAqQ==",
            "credential_id": "R+NuXRSywj4RPGGUpR+cuap7YIs2WCBnItvNZgS+4yM=",
            "public_key": SAMPLE_PUBLIC_KEY_BLOCK,
        },
    },
}

ISSUER_DID = "did:web:issuer.vpass.test"
PAGEX_URL = "https://pagex.vpass.test/pagex.html"
RP_ID = "pagex.vpass.test"
PAGEX_ORIGIN = "https://pagex.vpass.test"


@pytest.fixture
def sample_public_key_block() -> dict:
    return dict(SAMPLE_PUBLIC_KEY_BLOCK)


@pytest.fixture
def sample_credential_document() -> dict:
    import copy

    return copy.deepcopy(SAMPLE_CREDENTIAL_DOCUMENT)


@pytest.fixture
def user() -> UserInfo:
    return UserInfo(name="Pat Example", email="pat@example.org", phone="+15550112233")


@pytest.fixture
def issuer_key():
    return p256.generate_private_key()


@pytest.fixture
def clock() -> FakeClock:
    return FakeClock()


@pytest.fixture
def issuer(issuer_key, clock) -> IssuerService:
    config = IssuerConfig(issuer_did=ISSUER_DID, pagex_url=PAGEX_URL, rp_id=RP_ID)
    return IssuerService(config, signing_key=issuer_key, clock=clock)


@pytest.fixture
def transport() -> InstrumentedTransport:
    return InstrumentedTransport(None)


@pytest.fixture
def verifier(issuer, transport, clock) -> VerifierService:
    resolver = DidWebResolver(transport=transport)
    resolver.pin(ISSUER_DID, issuer.did_document)
    config = VerifierConfig(trusted_issuer_dids=(ISSUER_DID,))
    return VerifierService(config, resolver=resolver, clock=clock)


@pytest.fixture
def authenticator() -> SoftAuthenticator:
    return SoftAuthenticator()
