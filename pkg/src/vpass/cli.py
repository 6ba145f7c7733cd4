"""Command-line entry point: keygen, offline verification, services, demo.

Exit codes: 0 success, 2 verification failure, 3 configuration error,
4 I/O error, 5 network error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Optional

from . import p256
from .core import Challenge, UserInfo, b64_url_decode
from .didweb import (
    CachePolicy,
    DidDocument,
    DidWebResolver,
    InstrumentedTransport,
    make_did_document,
)
from .envelopes import decode_options
from .errors import (
    BadConfig,
    BindFailed,
    FetchFailed,
    IoError,
    MissingType,
    ResolutionFailed,
    VPassError,
)
from .issuer import IssuerConfig, IssuerService
from .softauth import SoftAuthenticator
from .vcred import VerifiablePasskeyCredential, verify_credential
from .verifier import VerifierConfig, VerifierService
from .webauthn import CeremonyResult, url_origin

EXIT_OK = 0
EXIT_VERIFY = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_NETWORK = 5

ENV_PREFIX = "VPASS_"


# --- config layering: file < environment < flags -------------------------------


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadConfig(f"config file {path} is not valid JSON: {exc}") from exc


def _layered(file_cfg: dict, env_key: str, flag_value, file_key: str, default=None):
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(ENV_PREFIX + env_key)
    if env_value is not None:
        return env_value
    return file_cfg.get(file_key, default)


# --- keygen ---------------------------------------------------------------------


def cmd_keygen(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        private_key = p256.generate_private_key()
        key_path = out_dir / "issuer_key.pem"
        key_path.write_bytes(p256.private_key_to_pem(private_key))
        key_path.chmod(0o600)
        document = make_did_document(args.did, p256.cose_from_private_key(private_key))
        doc_path = out_dir / "did.json"
        doc_path.write_text(document.to_json() + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"keygen failed: {exc}") from exc
    print(f"wrote {key_path}")
    print(f"wrote {doc_path} (id: {args.did})")
    return EXIT_OK


# --- offline credential verification ---------------------------------------------


def cmd_verify_vc(args: argparse.Namespace) -> int:
    try:
        vc_text = Path(args.vc_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read credential: {exc}") from exc

    source = args.did_doc
    if Path(source).is_file():
        try:
            document = DidDocument.from_json(Path(source).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoError(f"cannot read DID document: {exc}") from exc
    else:
        resolver = DidWebResolver()
        document = resolver.resolve(source, CachePolicy.FETCH_IF_ABSENT)

    failures = 0

    def check(label: str, fn: Callable[[], object]):
        nonlocal failures
        try:
            value = fn()
        except VPassError as exc:
            print(f"{label}: FAIL ({exc.code}: {exc})")
            failures += 1
            return None
        print(f"{label}: PASS")
        return value

    vc = check("structure", lambda: VerifiablePasskeyCredential.from_json(vc_text))
    if vc is None:
        return EXIT_VERIFY
    print(f"  issuer:        {vc.issuer}")
    print(f"  user:          {vc.subject.user.name} <{vc.subject.user.email}> {vc.subject.user.phone}")
    print(f"  pagex:         {vc.subject.pagex}")
    print(f"  credential id: {vc.id}")
    check("types", lambda: _check_types(vc))
    check("proof", lambda: verify_credential(vc, document.primary_key()))
    print(f"  types array:   {list(vc.types)}")
    return EXIT_OK if failures == 0 else EXIT_VERIFY


def _check_types(vc: VerifiablePasskeyCredential) -> bool:
    if "VerifiableCredential" not in vc.types or "VerifiablePasskey" not in vc.types:
        raise MissingType(f"types array is {list(vc.types)}")
    return True


# --- headless end-to-end demo ------------------------------------------------------


DEMO_ISSUER_DID = "did:web:issuer.vpass.test"
DEMO_PAGEX_URL = "https://pagex.vpass.test/pagex.html"
# Verifiers derive the assertion rp_id from the pagex host, so the issuer
# must enroll under exactly that host.
DEMO_RP_ID = "pagex.vpass.test"
DEMO_USER = UserInfo(name="Demo User", email="demo@vpass.test", phone="+10000000000")


def _redirect_parts(redirect_url: str) -> tuple[str, dict, str]:
    from urllib.parse import parse_qs, urlsplit

    parts = urlsplit(redirect_url)
    params = {k: v[0] for k, v in parse_qs(parts.query).items()}
    options = decode_options(params["options"])
    session = parse_qs(urlsplit(params["redirect_uri"]).query)["session"][0]
    return params["mode"], options, session


def cmd_demo(args: argparse.Namespace) -> int:
    say = print
    step = 0

    def emit(text: str) -> None:
        nonlocal step
        step += 1
        say(f"STEP {step}: {text}")

    say("PHASE ENROLLMENT")
    issuer = IssuerService(
        IssuerConfig(
            issuer_did=DEMO_ISSUER_DID, pagex_url=DEMO_PAGEX_URL, rp_id=DEMO_RP_ID
        ),
        signing_key=p256.generate_private_key(),
    )
    issuer_did_document = issuer.did_document
    device = SoftAuthenticator()

    emit(f"user opens the issuer page and submits details for {DEMO_USER.email}")
    redirect = issuer.enroll_start(DEMO_USER)
    emit("issuer generates creation options with a fresh challenge and redirects to PageX")
    mode, options, session = _redirect_parts(redirect)
    assert mode == "create"
    challenge = Challenge(bytes=b64_url_decode(options["challenge"]))
    emit("PageX relays the make-credential command to the cryptographic device")
    attestation = device.make_credential(
        rp_id=options["rp_id"],
        challenge=challenge,
        user=DEMO_USER,
        origin=url_origin(DEMO_PAGEX_URL),
    )
    emit("device generates a fresh P-256 keypair")
    emit("device binds the challenge into signed client data")
    emit("device hands the attestation back to the browser")
    emit("PageX forwards the attestation to the issuer finish endpoint")
    attestation = CeremonyResult.from_param(attestation.to_param())
    credential = issuer.enroll_finish(session, attestation)
    emit("issuer validates the attested challenge and extracts the public key")
    emit("issuer signs a verifiable credential holding the user details and key")
    credential_text = credential.to_json()
    emit("issuer returns the credential to the browser")
    emit(f"user stores the credential file ({len(credential_text)} bytes)")
    say(f"TRANSCRIPT: enrollment complete, credential id {credential.id}")

    if args.tamper_vc:
        # Flip one character inside the subject email to simulate tampering.
        credential_text = credential_text.replace(DEMO_USER.email, "dem0@vpass.test", 1)
        say("TRANSCRIPT: tampering with one byte of the stored credential")

    # The issuer's part is over: drop it before authentication begins and give
    # the verifier a transport that refuses (and records) every fetch attempt.
    del issuer
    transport = InstrumentedTransport(None)
    resolver = DidWebResolver(transport=transport)
    resolver.pin(DEMO_ISSUER_DID, issuer_did_document)
    verifier = VerifierService(
        VerifierConfig(trusted_issuer_dids=(DEMO_ISSUER_DID,)),
        resolver=resolver,
    )

    say("PHASE AUTHENTICATION")
    step = 0
    emit("user opens the verifier login page")
    emit("user uploads the credential file")
    try:
        redirect = verifier.auth_start(credential_text)
    except VPassError as exc:
        say(f"RESULT: auth_start failed with {exc.code}: {exc}")
        return EXIT_VERIFY
    emit("verifier checks the credential proof against the pinned issuer key")
    emit("verifier extracts the PageX URL from the credential")
    emit("verifier creates a fresh challenge")
    emit("verifier redirects the browser to PageX")
    mode, options, session = _redirect_parts(redirect)
    assert mode == "get"
    emit("PageX builds the credential request options client-side")
    assertion = device.get_assertion(
        rp_id=options["rp_id"],
        challenge=Challenge(bytes=b64_url_decode(options["challenge"])),
        allowed_credential_ids=[b64_url_decode(c) for c in options["allow_credential_ids"]],
        origin=url_origin(DEMO_PAGEX_URL),
    )
    emit("PageX obtains an assertion from the cryptographic device")
    assertion = CeremonyResult.from_param(assertion.to_param())
    emit("PageX redirects back to the verifier with the assertion")
    emit("verifier takes the enrolled public key from the credential")
    try:
        outcome = verifier.auth_finish(session, assertion)
    except VPassError as exc:
        say(f"RESULT: auth_finish failed with {exc.code}: {exc}")
        return EXIT_VERIFY
    emit(f"verifier validates the assertion and authenticates {outcome.user.name}")

    if args.replay:
        say("TRANSCRIPT: replaying the finished ceremony result")
        try:
            verifier.auth_finish(session, assertion)
        except VPassError as exc:
            say(f"RESULT: replay rejected with {exc.code}: {exc}")
            return EXIT_VERIFY
        say("RESULT: replay was accepted; replay protection failed")
        return EXIT_VERIFY

    if transport.calls:
        say(f"RESULT: verifier contacted the issuer host: {transport.calls}")
        return EXIT_VERIFY
    report = verifier.storage_report()
    say(f"TRANSCRIPT: issuer requests during authentication: {len(transport.calls)}")
    say(f"TRANSCRIPT: verifier storage report: {json.dumps(report)}")
    say(f"RESULT: authenticated {outcome.user.email} with zero issuer contact")
    return EXIT_OK


# --- long-running services -----------------------------------------------------------


def _split_listen(listen: str) -> tuple[str, int]:
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise BadConfig(f"listen address must be host:port, got {listen!r}")
    return host, int(port)


def _sigterm_to_clean_exit(signum, frame):
    raise SystemExit(0)


def _serve(app, listen: str) -> int:
    import signal
    import threading

    import uvicorn

    host, port = _split_listen(listen)
    if threading.current_thread() is threading.main_thread():
        # uvicorn drains connections on SIGTERM, restores the previous
        # handler, and re-raises the signal; this handler turns that
        # re-raise into a clean exit 0.
        signal.signal(signal.SIGTERM, _sigterm_to_clean_exit)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except SystemExit as exc:
        if exc.code in (0, None):
            return EXIT_OK
        # uvicorn signals startup problems (e.g. bind failure) by exiting.
        raise BindFailed(f"could not serve on {listen}") from exc
    return EXIT_OK


def cmd_serve_issuer(args: argparse.Namespace) -> int:
    from .http_api import build_issuer_app

    file_cfg = _load_config_file(args.config)
    key_path = _layered(file_cfg, "SIGNING_KEY", args.signing_key, "signing_key_path")
    if key_path is None:
        raise BadConfig("a signing key path is required (--signing-key)")
    config = IssuerConfig(
        issuer_did=_layered(file_cfg, "DID", args.did, "issuer_did", ""),
        pagex_url=_layered(file_cfg, "PAGEX_URL", args.pagex_url, "pagex_url", ""),
        rp_id=_layered(file_cfg, "RP_ID", args.rp_id, "rp_id", ""),
        signing_key_path=Path(key_path),
        challenge_ttl_seconds=int(
            _layered(file_cfg, "TTL", args.ttl, "challenge_ttl_seconds", 120)
        ),
        listen_address=_layered(file_cfg, "LISTEN", args.listen, "listen_address", "127.0.0.1:8801"),
    )
    try:
        service = IssuerService(config)
    except OSError as exc:
        raise IoError(f"cannot read signing key: {exc}") from exc
    pages = _layered(file_cfg, "PAGES_DIR", args.pages_dir, "pages_dir")
    app = build_issuer_app(service, pages_dir=Path(pages) if pages else None)
    return _serve(app, config.listen_address)


def cmd_serve_verifier(args: argparse.Namespace) -> int:
    from .http_api import build_verifier_app

    file_cfg = _load_config_file(args.config)
    trusted = args.trusted_did or []
    env_trusted = os.environ.get(ENV_PREFIX + "TRUSTED_DIDS")
    if not trusted and env_trusted:
        trusted = [d.strip() for d in env_trusted.split(",") if d.strip()]
    if not trusted:
        trusted = file_cfg.get("trusted_issuer_dids", [])
    policy_name = _layered(
        file_cfg, "CACHE_POLICY", args.cache_policy, "did_cache_policy", "pinned_only"
    )
    try:
        policy = CachePolicy(policy_name)
    except ValueError:
        raise BadConfig(f"unknown cache policy {policy_name!r}") from None
    if args.no_enforce_pagex_origin:
        enforce = False
    else:
        env_enforce = os.environ.get(ENV_PREFIX + "ENFORCE_PAGEX_ORIGIN")
        if env_enforce is not None:
            enforce = env_enforce.lower() not in ("0", "false", "no")
        else:
            enforce = bool(file_cfg.get("enforce_pagex_origin", True))
    config = VerifierConfig(
        trusted_issuer_dids=tuple(trusted),
        did_cache_policy=policy,
        challenge_ttl_seconds=int(
            _layered(file_cfg, "TTL", args.ttl, "challenge_ttl_seconds", 120)
        ),
        listen_address=_layered(file_cfg, "LISTEN", args.listen, "listen_address", "127.0.0.1:8802"),
        enforce_pagex_origin=enforce,
    )
    service = VerifierService(config)
    pins = dict(file_cfg.get("pins", {}))
    for did, doc_path in args.pin or []:
        pins[did] = doc_path
    for did, doc_path in pins.items():
        try:
            document = DidDocument.from_json(Path(doc_path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoError(f"cannot read pinned document {doc_path}: {exc}") from exc
        service.resolver.pin(did, document)
    pages = _layered(file_cfg, "PAGES_DIR", args.pages_dir, "pages_dir")
    app = build_verifier_app(
        service,
        pages_dir=Path(pages) if pages else None,
        enable_debug_storage=args.debug_storage,
    )
    return _serve(app, config.listen_address)


# --- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vpass",
        description="Verifiable Passkey issuer, verifier, and demo tooling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    keygen = sub.add_parser("keygen", help="generate an issuer key pair and DID document")
    keygen.add_argument("--out", required=True, help="output directory")
    keygen.add_argument("--did", required=True, help="issuer DID for the document")
    keygen.set_defaults(func=cmd_keygen)

    verify = sub.add_parser("verify-vc", help="verify a credential file offline")
    verify.add_argument("vc_path", help="credential file (.vpass.json)")
    verify.add_argument(
        "did_doc",
        help="issuer DID document path, or a did:web DID to fetch",
    )
    verify.set_defaults(func=cmd_verify_vc)

    demo = sub.add_parser("demo", help="run the headless end-to-end flow")
    demo.add_argument("--tamper-vc", action="store_true", help="corrupt the credential before upload")
    demo.add_argument("--replay", action="store_true", help="replay the finished ceremony")
    demo.set_defaults(func=cmd_demo)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--listen", help="host:port to serve on")
        p.add_argument("--ttl", type=int, help="challenge TTL in seconds")
        p.add_argument("--pages-dir", help="directory with the web pages")

    issuer = sub.add_parser("serve-issuer", help="run the enrollment service")
    add_common(issuer)
    issuer.add_argument("--did", help="issuer DID")
    issuer.add_argument("--pagex-url", help="PageX URL embedded in credentials")
    issuer.add_argument("--rp-id", help="relying party id for ceremonies")
    issuer.add_argument("--signing-key", help="path to the issuer private key PEM")
    issuer.set_defaults(func=cmd_serve_issuer)

    verifier = sub.add_parser("serve-verifier", help="run the authentication service")
    add_common(verifier)
    verifier.add_argument(
        "--trusted-did", action="append", help="issuer DID to trust (repeatable)"
    )
    verifier.add_argument(
        "--cache-policy", choices=[p.value for p in CachePolicy], help="DID cache policy"
    )
    verifier.add_argument(
        "--pin",
        nargs=2,
        action="append",
        metavar=("DID", "DOC"),
        help="pin a DID document from a file (repeatable)",
    )
    verifier.add_argument(
        "--no-enforce-pagex-origin",
        action="store_true",
        default=False,
        help="skip the optional PageX origin check",
    )
    verifier.add_argument(
        "--debug-storage", action="store_true", help="expose /debug/storage"
    )
    verifier.set_defaults(func=cmd_serve_verifier)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BadConfig, BindFailed) as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_IO
    except (FetchFailed, ResolutionFailed) as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except VPassError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
