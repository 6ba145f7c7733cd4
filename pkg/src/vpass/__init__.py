"""Verifiable Passkey: portable FIDO2 credentials as verifiable documents.

An issuer converts a passkey enrollment into a signed credential file; any
verifier holding the issuer's public key can authenticate the user from
that file alone, without contacting the issuer. A software authenticator
makes the whole protocol runnable headlessly.
"""

from .core import (
    Challenge,
    CoseKey,
    CredentialRecord,
    UserInfo,
    b64_std_decode,
    b64_std_encode,
    b64_url_decode,
    b64_url_encode,
    generate_challenge,
)
from .cose import (
    SerializedCoseKey,
    deserialize_cose_key,
    emit_cbor_cose_key,
    parse_cbor_cose_key,
    serialize_cose_key,
)
from .didweb import CachePolicy, DidDocument, DidWebResolver, did_web_to_url
from .issuer import IssuerConfig, IssuerService
from .softauth import SoftAuthenticator
from .vcred import (
    VerifiablePasskeyCredential,
    VerifiablePresentation,
    canonicalize,
    issue_credential,
    unwrap_presentation,
    verify_credential,
    wrap_presentation,
)
from .verifier import VerifierConfig, VerifierService
from .webauthn import (
    AuthenticatorData,
    CeremonyResult,
    ClientData,
    check_pagex_origin,
    parse_authenticator_data,
    parse_client_data,
    verify_assertion,
    verify_attestation,
)

__version__ = "0.1.0"

__all__ = [
    "Challenge",
    "CoseKey",
    "CredentialRecord",
    "UserInfo",
    "generate_challenge",
    "b64_std_encode",
    "b64_std_decode",
    "b64_url_encode",
    "b64_url_decode",
    "SerializedCoseKey",
    "serialize_cose_key",
    "deserialize_cose_key",
    "emit_cbor_cose_key",
    "parse_cbor_cose_key",
    "CachePolicy",
    "DidDocument",
    "DidWebResolver",
    "did_web_to_url",
    "IssuerConfig",
    "IssuerService",
    "SoftAuthenticator",
    "VerifiablePasskeyCredential",
    "VerifiablePresentation",
    "canonicalize",
    "issue_credential",
    "verify_credential",
    "wrap_presentation",
    "unwrap_presentation",
    "VerifierConfig",
    "VerifierService",
    "AuthenticatorData",
    "CeremonyResult",
    "ClientData",
    "parse_client_data",
    "parse_authenticator_data",
    "verify_attestation",
    "verify_assertion",
    "check_pagex_origin",
]
