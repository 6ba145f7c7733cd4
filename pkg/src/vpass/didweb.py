"""did:web resolution with a pinning cache.

Maps did:web identifiers to key-document URLs, fetches and parses issuer
key documents, and lets a verifier pin documents so authentication runs
with zero issuer contact. Both ":" and "/" are accepted as path
delimiters in the DID (credential files in the wild use "/" while the
did:web convention uses ":").

Trust bootstrapping is explicitly the caller's job: nothing here decides
which issuer DIDs to accept.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import unquote, urlsplit

import httpx

from .core import CoseKey
from .cose import deserialize_cose_key, serialize_cose_key
from .errors import CacheMiss, FetchFailed, IdMismatch, MalformedDid, MalformedDocument, NotDidWeb

DID_CONTEXT = "https://www.w3.org/ns/did/v1"
VERIFICATION_METHOD_TYPE = "VPassCoseKey2025"

_DID_WEB_PREFIX = "did:web:"


class CachePolicy(Enum):
    PINNED_ONLY = "pinned_only"
    FETCH_IF_ABSENT = "fetch_if_absent"


@dataclass(frozen=True)
class VerificationMethod:
    id: str
    key: CoseKey


@dataclass(frozen=True)
class DidDocument:
    id: str
    verification_methods: tuple[VerificationMethod, ...]

    def primary_key(self) -> CoseKey:
        if not self.verification_methods:
            raise MalformedDocument(f"DID document {self.id} carries no keys")
        return self.verification_methods[0].key

    def to_document(self) -> dict:
        return {
            "@context": [DID_CONTEXT],
            "id": self.id,
            "verificationMethod": [
                {
                    "id": method.id,
                    "type": VERIFICATION_METHOD_TYPE,
                    "controller": self.id,
                    "publicKeyCose": serialize_cose_key(method.key),
                }
                for method in self.verification_methods
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2)

    @classmethod
    def from_document(cls, document: dict) -> "DidDocument":
        if not isinstance(document, dict) or not isinstance(document.get("id"), str):
            raise MalformedDocument("DID document must be an object with a string id")
        methods_doc = document.get("verificationMethod")
        if not isinstance(methods_doc, list) or not methods_doc:
            raise MalformedDocument("DID document needs a non-empty verificationMethod list")
        methods = []
        for entry in methods_doc:
            if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
                raise MalformedDocument("verification method must be an object with an id")
            key_doc = entry.get("publicKeyCose")
            if not isinstance(key_doc, dict):
                raise MalformedDocument("verification method lacks publicKeyCose")
            methods.append(
                VerificationMethod(id=entry["id"], key=deserialize_cose_key(key_doc))
            )
        return cls(id=document["id"], verification_methods=tuple(methods))

    @classmethod
    def from_json(cls, text: str) -> "DidDocument":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"DID document does not parse: {exc}") from exc
        return cls.from_document(document)


def make_did_document(did: str, key: CoseKey) -> DidDocument:
    return DidDocument(
        id=did,
        verification_methods=(VerificationMethod(id=f"{did}#key-1", key=key),),
    )


def did_web_to_url(did: str) -> str:
    """Map a did:web identifier to the HTTPS URL of its key document.

    No path: https://host/.well-known/did.json. With path segments
    (":" or "/" delimited): https://host/<segments>/did.json.
    """
    if not did.startswith(_DID_WEB_PREFIX):
        raise NotDidWeb(f"not a did:web identifier: {did!r}")
    rest = did[len(_DID_WEB_PREFIX):]
    if not rest:
        raise MalformedDid("did:web identifier has no host")
    segments = rest.replace("/", ":").split(":")
    if any(not segment for segment in segments):
        raise MalformedDid(f"empty segment in did:web identifier: {did!r}")
    host = unquote(segments[0]).lower()
    if "/" in host or any(ch.isspace() for ch in host):
        raise MalformedDid(f"invalid host in did:web identifier: {did!r}")
    path_segments = [unquote(segment) for segment in segments[1:]]
    if not path_segments:
        return f"https://{host}/.well-known/did.json"
    return f"https://{host}/" + "/".join(path_segments) + "/did.json"


def did_web_document_path(did: str) -> str:
    """URL path under which a host should serve the DID's key document."""
    return urlsplit(did_web_to_url(did)).path


def default_transport(url: str) -> bytes:
    response = httpx.get(url, timeout=10.0, follow_redirects=True)
    response.raise_for_status()
    return response.content


class InstrumentedTransport:
    """Transport wrapper that records every outbound request URL.

    With no inner transport it refuses all requests, which makes
    "zero network access" assertions direct: any attempt raises and the
    call list stays observable.
    """

    def __init__(self, inner: Optional[Callable[[str], bytes]] = None) -> None:
        self._inner = inner
        self.calls: list[str] = []

    def __call__(self, url: str) -> bytes:
        self.calls.append(url)
        if self._inner is None:
            raise FetchFailed(f"network disabled, refused fetch of {url}")
        return self._inner(url)


class DidWebResolver:
    """Resolve did:web identifiers through a pinning cache.

    pinned_only never touches the transport and fails on a cache miss;
    fetch_if_absent fetches over HTTPS, validates the document id, and
    caches. Safe for concurrent use.
    """

    def __init__(self, transport: Optional[Callable[[str], bytes]] = None) -> None:
        self._transport = transport if transport is not None else default_transport
        self._cache: dict[str, DidDocument] = {}
        self._lock = threading.RLock()

    def pin(self, did: str, document: DidDocument) -> None:
        """Pin a document; later pins for the same DID overwrite."""
        if document.id != did:
            raise IdMismatch(f"document id {document.id!r} != pinned DID {did!r}")
        with self._lock:
            self._cache[did] = document

    def resolve(self, did: str, policy: CachePolicy = CachePolicy.PINNED_ONLY) -> DidDocument:
        url = did_web_to_url(did)
        with self._lock:
            cached = self._cache.get(did)
        if cached is not None:
            return cached
        if policy is CachePolicy.PINNED_ONLY:
            raise CacheMiss(f"{did} is not pinned and the policy forbids fetching")
        try:
            payload = self._transport(url)
        except FetchFailed:
            raise
        except Exception as exc:
            raise FetchFailed(f"fetching {url} failed: {exc}") from exc
        document = DidDocument.from_json(payload.decode("utf-8"))
        if document.id != did:
            raise IdMismatch(f"document id {document.id!r} != requested DID {did!r}")
        with self._lock:
            self._cache[did] = document
        return document

    def save_cache(self, path: Path) -> None:
        with self._lock:
            snapshot = {did: doc.to_document() for did, doc in self._cache.items()}
        path.write_text(json.dumps(snapshot, indent=2), encoding="utf-8")

    def load_cache(self, path: Path) -> None:
        snapshot = json.loads(path.read_text(encoding="utf-8"))
        for did, doc in snapshot.items():
            self.pin(did, DidDocument.from_document(doc))
