"""HTTP surfaces for the issuer and verifier services.

Thin FastAPI wiring over the service classes: all protocol logic lives in
issuer.py / verifier.py so the flows are equally drivable in-process
(tests, demo) and over the wire (browsers via PageX redirects).
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Form, Request
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse, RedirectResponse, Response
from starlette.datastructures import UploadFile

from .errors import (
    AssertionInvalid,
    AttestationInvalid,
    BadSignature,
    CredentialIdMismatch,
    MalformedUpload,
    ProofInvalid,
    ResolutionFailed,
    SessionExpired,
    SessionReplayed,
    UnknownSession,
    UntrustedIssuer,
    ValidationFailed,
    VPassError,
)
from .core import UserInfo
from .issuer import IssuerService
from .vcred import CREDENTIAL_FILE_SUFFIX
from .verifier import VerifierService
from .webauthn import CeremonyResult

_ERROR_STATUS: dict[type, int] = {
    ValidationFailed: 422,
    UnknownSession: 404,
    SessionExpired: 410,
    SessionReplayed: 409,
    AttestationInvalid: 400,
    AssertionInvalid: 401,
    BadSignature: 401,
    CredentialIdMismatch: 401,
    MalformedUpload: 400,
    ProofInvalid: 400,
    UntrustedIssuer: 403,
    ResolutionFailed: 502,
}


def _install_error_handler(app: FastAPI) -> None:
    @app.exception_handler(VPassError)
    async def handle_vpass_error(request: Request, exc: VPassError) -> JSONResponse:
        status = _ERROR_STATUS.get(type(exc), 400)
        return JSONResponse(
            status_code=status, content={"error": exc.code, "detail": str(exc)}
        )


def _page_response(pages_dir: Optional[Path], name: str, fallback: str) -> Response:
    if pages_dir is not None:
        candidate = pages_dir / name
        if candidate.is_file():
            return FileResponse(candidate, media_type="text/html")
    return HTMLResponse(fallback)


def _parse_result_param(param: str, error_cls: type) -> CeremonyResult:
    try:
        return CeremonyResult.from_param(param)
    except ValueError as exc:
        raise error_cls(str(exc)) from exc


_ENROLL_FALLBACK = """<!doctype html>
<title>Verifiable Passkey enrollment</title>
<p>Enrollment UI is not installed. POST name/email/phone to /enroll/start.</p>
<form method="post" action="/enroll/start">
  <input name="name" placeholder="name" required>
  <input name="email" placeholder="email" required>
  <input name="phone" placeholder="phone" required>
  <button>Enroll</button>
</form>
"""

_LOGIN_FALLBACK = """<!doctype html>
<title>Verifiable Passkey login</title>
<p>Login UI is not installed. POST a credential file to /auth/start.</p>
<form method="post" action="/auth/start" enctype="multipart/form-data">
  <input type="file" name="credential" required>
  <button>Log in</button>
</form>
"""


def build_issuer_app(service: IssuerService, pages_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="vpass issuer")
    _install_error_handler(app)

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"status": "ok", "role": "issuer"}

    @app.get("/enroll")
    async def enroll_page() -> Response:
        return _page_response(pages_dir, "enroll.html", _ENROLL_FALLBACK)

    @app.post("/enroll/start")
    async def enroll_start(
        name: str = Form(""), email: str = Form(""), phone: str = Form("")
    ) -> Response:
        redirect = service.enroll_start(UserInfo(name=name, email=email, phone=phone))
        return RedirectResponse(redirect, status_code=303)

    @app.get("/enroll/finish")
    async def enroll_finish(
        session: str, result: Optional[str] = None, error: Optional[str] = None
    ) -> Response:
        if error is not None or result is None:
            # Consume the session either way: an aborted ceremony ends it.
            service.enroll_finish_abort(session)
            raise AttestationInvalid(f"ceremony failed on PageX: {error or 'no result'}")
        credential = service.enroll_finish(
            session, _parse_result_param(result, AttestationInvalid)
        )
        filename = (credential.id.rpartition(":")[2][:16] or "credential") + CREDENTIAL_FILE_SUFFIX
        return Response(
            content=credential.to_json(),
            media_type="application/json",
            headers={"Content-Disposition": f'attachment; filename="{filename}"'},
        )

    @app.get(service.did_document_path)
    async def did_document() -> JSONResponse:
        return JSONResponse(service.serve_did_document())

    return app


_OUTCOME_PAGE = """<!doctype html>
<title>Authentication result</title>
<h1>Authentication successful</h1>
<p>Welcome, {name} ({email}).</p>
"""


def build_verifier_app(
    service: VerifierService,
    pages_dir: Optional[Path] = None,
    enable_debug_storage: bool = False,
) -> FastAPI:
    app = FastAPI(title="vpass verifier")
    _install_error_handler(app)

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"status": "ok", "role": "verifier"}

    @app.get("/login")
    async def login_page() -> Response:
        return _page_response(pages_dir, "login.html", _LOGIN_FALLBACK)

    @app.post("/auth/start")
    async def auth_start(request: Request) -> Response:
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("credential")
            if not isinstance(upload, UploadFile):
                raise MalformedUpload("multipart upload needs a 'credential' file field")
            body = await upload.read()
        else:
            body = await request.body()
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedUpload("credential upload must be UTF-8 text") from exc
        redirect = service.auth_start(text)
        return RedirectResponse(redirect, status_code=303)

    @app.get("/auth/finish")
    async def auth_finish(
        request: Request,
        session: str,
        result: Optional[str] = None,
        error: Optional[str] = None,
    ) -> Response:
        if error is not None or result is None:
            service.auth_finish_abort(session)
            raise AssertionInvalid(f"ceremony failed on PageX: {error or 'no result'}")
        outcome = service.auth_finish(
            session, _parse_result_param(result, AssertionInvalid)
        )
        if "text/html" in request.headers.get("accept", ""):
            page = _OUTCOME_PAGE.format(name=outcome.user.name, email=outcome.user.email)
            return HTMLResponse(page)
        return JSONResponse(
            {
                "authenticated": True,
                "user": {
                    "name": outcome.user.name,
                    "email": outcome.user.email,
                    "phone": outcome.user.phone,
                },
                "session_token": outcome.session_token,
            }
        )

    if enable_debug_storage:

        @app.get("/debug/storage")
        async def debug_storage() -> dict:
            return service.storage_report()

    return app
