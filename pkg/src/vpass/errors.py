"""Exception hierarchy for the vpass package.

Every failure mode a caller is expected to branch on gets its own class so
services and the CLI can map errors to HTTP statuses and exit codes without
string matching.
"""

from __future__ import annotations


class VPassError(Exception):
    """Base class for all vpass errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- core types / encodings -------------------------------------------------


class LengthTooShort(VPassError):
    """Challenge length below the 16-byte minimum."""


class InvalidBase64(VPassError):
    """Input is not valid padded standard base64."""


class InvalidBase64Url(VPassError):
    """Input is not valid unpadded URL-safe base64."""


class NotOnCurve(VPassError):
    """(x, y) does not satisfy the P-256 curve equation."""


class UnsupportedProfile(VPassError):
    """Key is not the supported EC2/ES256/P-256 COSE profile."""


# --- COSE codec ---------------------------------------------------------------


class MissingPrefix(VPassError):
    """Byte-typed serialized COSE entry lacks the 'base64_' magic word."""


class MalformedCbor(VPassError):
    """CBOR bytes do not decode as a COSE key map."""


# --- WebAuthn parsing and verification ---------------------------------------


class VerificationError(VPassError):
    """Base for ceremony verification failures."""


class MalformedClientData(VPassError):
    """clientDataJSON is not a valid ceremony document."""


class UnknownCeremonyType(VPassError):
    """clientDataJSON type is neither webauthn.create nor webauthn.get."""


class TooShort(VPassError):
    """Authenticator data is shorter than the 37-byte fixed header."""


class AttestedDataMissing(VPassError):
    """AT flag set but the attested credential data is absent or truncated."""


class TrailingGarbage(VPassError):
    """Authenticator data has unconsumed bytes past the defined layout."""


class ChallengeMismatch(VerificationError):
    """Client data challenge differs from the expected challenge."""


class OriginMismatch(VerificationError):
    """Client data origin differs from the expected origin."""


class RpIdMismatch(VerificationError):
    """rpIdHash is not SHA-256 of the expected relying party id."""


class UserNotPresent(VerificationError):
    """User-present flag not set in authenticator data."""


class NoAttestedCredential(VerificationError):
    """Attestation carries no attested credential data."""


class BadSignature(VerificationError):
    """Assertion signature does not verify under the credential key."""


class CounterRegression(VerificationError):
    """Assertion sign count did not advance past the stored counter."""


class MalformedUrl(VPassError):
    """String is not an absolute http(s) URL."""


# --- verifiable credentials ---------------------------------------------------


class ProofPresent(VPassError):
    """Canonicalization input still contains a proof block."""


class ProofInvalid(VPassError):
    """Credential proof does not verify under the issuer key."""


class MissingType(VPassError):
    """Credential type array lacks VerifiablePasskey."""


class MalformedDocument(VPassError):
    """Document does not have the credential/presentation shape."""


class EmptyPresentation(VPassError):
    """Presentation contains no credential."""


class MultipleCredentials(VPassError):
    """Presentation contains more than one credential."""


# --- did:web ------------------------------------------------------------------


class NotDidWeb(VPassError):
    """Identifier is not a did:web DID."""


class MalformedDid(VPassError):
    """did:web identifier has an empty or invalid host/path."""


class CacheMiss(VPassError):
    """DID not pinned and policy forbids fetching."""


class FetchFailed(VPassError):
    """Transport error while fetching a DID document."""


class IdMismatch(VPassError):
    """DID document id differs from the DID it was resolved or pinned for."""


# --- soft authenticator ---------------------------------------------------------


class NoMatchingCredential(VPassError):
    """No stored credential matches the allow list."""


class WrongRpId(VPassError):
    """Stored credential is bound to a different relying party id."""


class MalformedState(VPassError):
    """Exported authenticator state does not parse."""


# --- services -------------------------------------------------------------------


class ValidationFailed(VPassError):
    """Enrollment input rejected (empty user fields)."""


class UnknownSession(VPassError):
    """Session token was never issued."""


class SessionExpired(VPassError):
    """Session exceeded its TTL before finish."""


class SessionReplayed(VPassError):
    """Session was already consumed by a previous finish."""


class AttestationInvalid(VPassError):
    """Enrollment ceremony result failed verification."""


class MalformedUpload(VPassError):
    """Uploaded document is not a credential or presentation."""


class UntrustedIssuer(VPassError):
    """Credential issuer DID is not in the verifier's allow list."""


class ResolutionFailed(VPassError):
    """Issuer DID could not be resolved to a key document."""


class AssertionInvalid(VPassError):
    """Authentication ceremony result failed verification."""


class CredentialIdMismatch(VPassError):
    """Assertion credential id differs from the one bound to the session."""


# --- CLI / configuration ----------------------------------------------------------


class IoError(VPassError):
    """File read or write failed."""


class BindFailed(VPassError):
    """Service could not bind its listen address."""


class BadConfig(VPassError):
    """Configuration is incomplete or inconsistent."""
