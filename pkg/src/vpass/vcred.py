"""The Verifiable Passkey credential document: build, sign, verify, present.

The document shape mirrors the credential file format field for field:
@context, id, type, issuer, issuanceDate, credentialSubject {id, user,
pagex, cred {aaguid, credential_id, public_key}}, plus a proof block.
Parsing is strict: unknown members anywhere make the document malformed,
so any structural tampering is caught before signature checking.

Proof suite: ES256 (64-byte r||s, base64url) over the canonical rendering
of the credential with the proof removed. Canonicalization is JCS-style:
member names sorted, no insignificant whitespace, UTF-8.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Optional
from urllib.parse import urlsplit

from cryptography.hazmat.primitives.asymmetric import ec

from . import p256
from .core import (
    CoseKey,
    CredentialRecord,
    UserInfo,
    b64_std_decode,
    b64_std_encode,
    b64_url_decode,
    b64_url_encode,
)
from .cose import deserialize_cose_key, serialize_cose_key
from .errors import (
    EmptyPresentation,
    MalformedDocument,
    MissingType,
    MultipleCredentials,
    ProofInvalid,
    ProofPresent,
)

W3C_CREDENTIALS_CONTEXT = "https://www.w3.org/2018/credentials/v1"
TYPE_VERIFIABLE_CREDENTIAL = "VerifiableCredential"
TYPE_VERIFIABLE_PASSKEY = "VerifiablePasskey"
TYPE_VERIFIABLE_PRESENTATION = "VerifiablePresentation"
PROOF_TYPE = "VPassSignature2025"

CREDENTIAL_FILE_SUFFIX = ".vpass.json"

# Hosts for which a plain-http pagex URL is accepted (secure contexts).
_LOOPBACK_HOSTS = {"localhost", "127.0.0.1", "[::1]"}


def format_timestamp(moment: datetime) -> str:
    """Microsecond-precision UTC timestamp without a timezone suffix."""
    if moment.tzinfo is not None:
        moment = moment.astimezone(timezone.utc).replace(tzinfo=None)
    return moment.isoformat(timespec="microseconds")


def parse_timestamp(text: str) -> datetime:
    """Accepts the document form and, additionally, Z-suffixed timestamps."""
    if text.endswith("Z"):
        text = text[:-1]
    try:
        return datetime.fromisoformat(text)
    except ValueError as exc:
        raise MalformedDocument(f"bad timestamp {text!r}") from exc


def _check_pagex_url(url: str) -> None:
    parts = urlsplit(url)
    if parts.scheme == "https" and parts.hostname:
        return
    if parts.scheme == "http" and parts.hostname in _LOOPBACK_HOSTS:
        return
    raise MalformedDocument(f"pagex must be an absolute https URL, got {url!r}")


@dataclass(frozen=True)
class Proof:
    proof_type: str
    created: str
    verification_method: str
    proof_value: str

    def to_document(self) -> dict:
        return {
            "type": self.proof_type,
            "created": self.created,
            "verificationMethod": self.verification_method,
            "proofValue": self.proof_value,
        }

    @classmethod
    def from_document(cls, document: dict) -> "Proof":
        _require_members(document, {"type", "created", "verificationMethod", "proofValue"}, "proof")
        for name, value in document.items():
            if not isinstance(value, str):
                raise MalformedDocument(f"proof member {name!r} must be a string")
        return cls(
            proof_type=document["type"],
            created=document["created"],
            verification_method=document["verificationMethod"],
            proof_value=document["proofValue"],
        )


@dataclass(frozen=True)
class Subject:
    subject_id: str
    user: UserInfo
    pagex: str
    record: CredentialRecord

    def to_document(self) -> dict:
        return {
            "id": self.subject_id,
            "user": {
                "email": self.user.email,
                "name": self.user.name,
                "phone": self.user.phone,
            },
            "pagex": self.pagex,
            "cred": {
                "aaguid": b64_std_encode(self.record.aaguid),
                "credential_id": b64_std_encode(self.record.credential_id),
                "public_key": serialize_cose_key(self.record.public_key),
            },
        }

    @classmethod
    def from_document(cls, document: dict) -> "Subject":
        _require_members(document, {"id", "user", "pagex", "cred"}, "credentialSubject")
        user_doc = document["user"]
        if not isinstance(user_doc, dict):
            raise MalformedDocument("credentialSubject.user must be an object")
        _require_members(user_doc, {"email", "name", "phone"}, "credentialSubject.user")
        for name, value in user_doc.items():
            if not isinstance(value, str):
                raise MalformedDocument(f"user member {name!r} must be a string")
        if not isinstance(document["id"], str):
            raise MalformedDocument("credentialSubject.id must be a string")
        pagex = document["pagex"]
        if not isinstance(pagex, str):
            raise MalformedDocument("credentialSubject.pagex must be a string")
        _check_pagex_url(pagex)
        cred_doc = document["cred"]
        if not isinstance(cred_doc, dict):
            raise MalformedDocument("credentialSubject.cred must be an object")
        _require_members(cred_doc, {"aaguid", "credential_id", "public_key"}, "cred")
        try:
            aaguid = b64_std_decode(cred_doc["aaguid"])
            credential_id = b64_std_decode(cred_doc["credential_id"])
        except Exception as exc:
            raise MalformedDocument(f"cred bytes are not standard base64: {exc}") from exc
        if not isinstance(cred_doc["public_key"], dict):
            raise MalformedDocument("cred.public_key must be an object")
        public_key = deserialize_cose_key(cred_doc["public_key"])
        try:
            record = CredentialRecord(
                aaguid=aaguid, credential_id=credential_id, public_key=public_key
            )
        except ValueError as exc:
            raise MalformedDocument(str(exc)) from exc
        return cls(
            subject_id=document["id"],
            user=UserInfo(
                name=user_doc["name"], email=user_doc["email"], phone=user_doc["phone"]
            ),
            pagex=pagex,
            record=record,
        )


@dataclass(frozen=True)
class VerifiablePasskeyCredential:
    context: tuple[str, ...]
    id: str
    types: tuple[str, ...]
    issuer: str
    issuance_date: str
    subject: Subject
    proof: Optional[Proof] = None

    def to_document(self) -> dict:
        document = {
            "@context": list(self.context),
            "id": self.id,
            "type": list(self.types),
            "issuer": self.issuer,
            "issuanceDate": self.issuance_date,
            "credentialSubject": self.subject.to_document(),
        }
        if self.proof is not None:
            document["proof"] = self.proof.to_document()
        return document

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, ensure_ascii=False)

    @classmethod
    def from_document(cls, document: dict) -> "VerifiablePasskeyCredential":
        if not isinstance(document, dict):
            raise MalformedDocument("credential must be a JSON object")
        members = set(document)
        required = {"@context", "id", "type", "issuer", "issuanceDate", "credentialSubject"}
        if not required <= members or members - required - {"proof"}:
            raise MalformedDocument(
                f"credential members must be {sorted(required)} (+proof), got {sorted(members)}"
            )
        context = document["@context"]
        if not isinstance(context, list) or not all(isinstance(c, str) for c in context):
            raise MalformedDocument("@context must be a list of strings")
        if W3C_CREDENTIALS_CONTEXT not in context:
            raise MalformedDocument(f"@context must include {W3C_CREDENTIALS_CONTEXT}")
        types = document["type"]
        if not isinstance(types, list) or not all(isinstance(t, str) for t in types):
            raise MalformedDocument("type must be a list of strings")
        if TYPE_VERIFIABLE_CREDENTIAL not in types or TYPE_VERIFIABLE_PASSKEY not in types:
            raise MissingType(
                f"type must include {TYPE_VERIFIABLE_CREDENTIAL} and {TYPE_VERIFIABLE_PASSKEY}"
            )
        if not isinstance(document["id"], str) or not isinstance(document["issuer"], str):
            raise MalformedDocument("id and issuer must be strings")
        if not isinstance(document["issuanceDate"], str):
            raise MalformedDocument("issuanceDate must be a string")
        parse_timestamp(document["issuanceDate"])
        if not isinstance(document["credentialSubject"], dict):
            raise MalformedDocument("credentialSubject must be an object")
        subject = Subject.from_document(document["credentialSubject"])
        proof = None
        if "proof" in document:
            if not isinstance(document["proof"], dict):
                raise MalformedDocument("proof must be an object")
            proof = Proof.from_document(document["proof"])
        return cls(
            context=tuple(context),
            id=document["id"],
            types=tuple(types),
            issuer=document["issuer"],
            issuance_date=document["issuanceDate"],
            subject=subject,
            proof=proof,
        )

    @classmethod
    def from_json(cls, text: str) -> "VerifiablePasskeyCredential":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"credential does not parse as JSON: {exc}") from exc
        return cls.from_document(document)


@dataclass(frozen=True)
class VerifiablePresentation:
    context: tuple[str, ...]
    types: tuple[str, ...]
    credentials: tuple[VerifiablePasskeyCredential, ...]

    def to_document(self) -> dict:
        return {
            "@context": list(self.context),
            "type": list(self.types),
            "verifiableCredential": [vc.to_document() for vc in self.credentials],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, ensure_ascii=False)

    @classmethod
    def from_document(cls, document: dict) -> "VerifiablePresentation":
        if not isinstance(document, dict):
            raise MalformedDocument("presentation must be a JSON object")
        _require_members(document, {"@context", "type", "verifiableCredential"}, "presentation")
        types = document["type"]
        if not isinstance(types, list) or TYPE_VERIFIABLE_PRESENTATION not in types:
            raise MalformedDocument("presentation type must include VerifiablePresentation")
        embedded = document["verifiableCredential"]
        if not isinstance(embedded, list):
            raise MalformedDocument("verifiableCredential must be a list")
        return cls(
            context=tuple(document["@context"]),
            types=tuple(types),
            credentials=tuple(
                VerifiablePasskeyCredential.from_document(d) for d in embedded
            ),
        )


def _require_members(document: dict, expected: set[str], where: str) -> None:
    if set(document) != expected:
        raise MalformedDocument(
            f"{where} members must be exactly {sorted(expected)}, got {sorted(document)}"
        )


def canonicalize(document: dict) -> bytes:
    """Deterministic rendering used as the proof's signing input.

    Member names sorted lexicographically, compact separators, UTF-8,
    non-ASCII passed through. The document must not contain a proof.
    """
    if "proof" in document:
        raise ProofPresent("canonicalization input must not contain a proof")
    return json.dumps(
        document, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def default_credential_uri(record: CredentialRecord) -> str:
    return "urn:vpass:" + b64_url_encode(record.credential_id)


def issue_credential(
    record: CredentialRecord,
    user: UserInfo,
    pagex_url: str,
    issuer_did: str,
    issuer_signing_key: ec.EllipticCurvePrivateKey,
    credential_uri: Optional[str] = None,
    subject_id: str = "User creds",
    now: Optional[datetime] = None,
) -> VerifiablePasskeyCredential:
    """Build and sign a credential for an enrolled passkey."""
    _check_pagex_url(pagex_url)
    timestamp = format_timestamp(now if now is not None else datetime.now(timezone.utc))
    unsigned = VerifiablePasskeyCredential(
        context=(W3C_CREDENTIALS_CONTEXT,),
        id=credential_uri or default_credential_uri(record),
        types=(TYPE_VERIFIABLE_CREDENTIAL, TYPE_VERIFIABLE_PASSKEY),
        issuer=issuer_did,
        issuance_date=timestamp,
        subject=Subject(
            subject_id=subject_id,
            user=user,
            pagex=pagex_url,
            record=CredentialRecord(
                aaguid=record.aaguid,
                credential_id=record.credential_id,
                public_key=record.public_key,
            ),
        ),
    )
    signature = p256.sign_raw(issuer_signing_key, canonicalize(unsigned.to_document()))
    proof = Proof(
        proof_type=PROOF_TYPE,
        created=timestamp,
        verification_method=f"{issuer_did}#key-1",
        proof_value=b64_url_encode(signature),
    )
    return replace(unsigned, proof=proof)


def verify_credential(
    vc: VerifiablePasskeyCredential, issuer_public_key: CoseKey
) -> tuple[UserInfo, str, CredentialRecord]:
    """Check structure and proof; returns the extracted subject data.

    Performs no network access: the issuer key is an explicit parameter.
    """
    if TYPE_VERIFIABLE_CREDENTIAL not in vc.types or TYPE_VERIFIABLE_PASSKEY not in vc.types:
        raise MissingType("credential type array lacks VerifiablePasskey")
    if vc.proof is None:
        raise MalformedDocument("credential has no proof")
    if vc.proof.proof_type != PROOF_TYPE:
        raise ProofInvalid(f"unsupported proof type {vc.proof.proof_type!r}")
    unsigned = replace(vc, proof=None)
    try:
        signature = b64_url_decode(vc.proof.proof_value)
    except Exception as exc:
        raise ProofInvalid(f"proofValue is not base64url: {exc}") from exc
    if not p256.verify_raw(issuer_public_key, canonicalize(unsigned.to_document()), signature):
        raise ProofInvalid("proof does not verify under the issuer key")
    return vc.subject.user, vc.subject.pagex, vc.subject.record


def wrap_presentation(vc: VerifiablePasskeyCredential) -> VerifiablePresentation:
    if vc.proof is None:
        raise MalformedDocument("only a proved credential can be presented")
    return VerifiablePresentation(
        context=(W3C_CREDENTIALS_CONTEXT,),
        types=(TYPE_VERIFIABLE_PRESENTATION,),
        credentials=(vc,),
    )


def unwrap_presentation(vp: VerifiablePresentation) -> VerifiablePasskeyCredential:
    if len(vp.credentials) == 0:
        raise EmptyPresentation("presentation contains no credential")
    if len(vp.credentials) > 1:
        raise MultipleCredentials(f"presentation contains {len(vp.credentials)} credentials")
    return vp.credentials[0]


def parse_uploaded_document(text: str) -> VerifiablePasskeyCredential:
    """Accepts either a bare credential or a presentation envelope."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"upload does not parse as JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise MalformedDocument("upload must be a JSON object")
    types = document.get("type")
    if isinstance(types, list) and TYPE_VERIFIABLE_PRESENTATION in types:
        return unwrap_presentation(VerifiablePresentation.from_document(document))
    return VerifiablePasskeyCredential.from_document(document)
